//! Differentiable no-reference quality metrics.
//!
//! A metric scores an RGB image on a declared range and exposes the exact
//! analytic gradient of the score with respect to every pixel. Two reference
//! metrics ship with the crate: a closed-form feature metric
//! ([`ProxyMetric`]) and a small hand-written convolutional network
//! ([`TinyCnnMetric`]). Both are deterministic and pure; real learned metrics
//! can be plugged in behind the same trait.

mod gradcheck;
mod proxy;
mod tinycnn;

pub use gradcheck::grad_check;
#[cfg(test)]
pub(crate) use gradcheck::fd_scalar;
pub use proxy::ProxyMetric;
pub use tinycnn::{TinyCnnMetric, TinyCnnWeights, TIPW_MAGIC};

use crate::error::{Error, Result};
use crate::imagery::{Image, Tensor};
use std::path::Path;

/// Static facts about a metric: identity, score range, minimum input side.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricDescriptor {
    pub id: String,
    pub range_lo: f64,
    pub range_hi: f64,
    pub min_side: usize,
}

impl MetricDescriptor {
    pub fn new(id: &str, range_lo: f64, range_hi: f64, min_side: usize) -> Self {
        assert!(range_hi > range_lo);
        Self {
            id: id.to_string(),
            range_lo,
            range_hi,
            min_side,
        }
    }

    /// Span of the score scale.
    pub fn m_range(&self) -> f64 {
        self.range_hi - self.range_lo
    }
}

/// Score plus the gradient of the score w.r.t. every input sample.
#[derive(Clone, Debug)]
pub struct MetricEval {
    pub score: f64,
    pub gradient: Tensor,
}

/// A differentiable no-reference metric. Implementations must be pure: equal
/// inputs give bit-equal scores, and calls may run concurrently.
pub trait Metric: Send + Sync {
    fn descriptor(&self) -> &MetricDescriptor;

    /// Score and exact analytic gradient.
    fn evaluate(&self, img: &Image) -> Result<MetricEval>;

    /// Score only; the default goes through [`Metric::evaluate`], and
    /// implementations override it with a cheaper forward pass.
    fn score(&self, img: &Image) -> Result<f64> {
        Ok(self.evaluate(img)?.score)
    }
}

pub(crate) fn check_min_side(desc: &MetricDescriptor, img: &Image) -> Result<()> {
    if img.height() < desc.min_side || img.width() < desc.min_side {
        return Err(Error::ImageTooSmall {
            height: img.height(),
            width: img.width(),
            min_side: desc.min_side,
        });
    }
    Ok(())
}

/// Builds a metric by id: `"proxy"` or `"tinycnn"`. The tinycnn takes its
/// weights from `weights_path` when given, otherwise the canonical built-in
/// set.
pub fn create_metric(id: &str, weights_path: Option<&Path>) -> Result<Box<dyn Metric>> {
    match id {
        "proxy" => Ok(Box::new(ProxyMetric::new())),
        "tinycnn" => {
            let weights = match weights_path {
                Some(p) => TinyCnnWeights::load(p)?,
                None => TinyCnnWeights::canonical(),
            };
            Ok(Box::new(TinyCnnMetric::new(weights)))
        }
        other => Err(Error::UnknownMetric(other.to_string())),
    }
}

/// Logistic squashing used by both reference metrics.
#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}
