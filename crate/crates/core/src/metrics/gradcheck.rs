//! Central finite-difference validation of analytic metric gradients.

use super::{Metric, MetricEval};
use crate::error::Result;
use crate::imagery::{Image, RngStream, CHANNELS};

/// Compares the analytic gradient against central finite differences at
/// `probes` randomly chosen samples and returns the maximum relative error
/// `|analytic - fd| / max(1e-12, |fd|)`.
///
/// Probes are drawn from `rng`; samples closer than `step` to the `[0,1]`
/// bounds are redrawn so the two-sided stencil stays inside the valid range.
pub fn grad_check(
    metric: &dyn Metric,
    img: &Image,
    probes: usize,
    step: f64,
    rng: &mut RngStream,
) -> Result<f64> {
    assert!(probes >= 1);
    assert!(step > 0.0);
    let MetricEval { gradient, .. } = metric.evaluate(img)?;
    let n = img.len();
    let mut max_rel = 0.0f64;
    let mut checked = 0usize;
    let mut attempts = 0usize;
    while checked < probes && attempts < probes * 64 {
        attempts += 1;
        let i = rng.uniform_u64(n as u64) as usize;
        let v = img.data()[i];
        if v - step < 0.0 || v + step > 1.0 {
            continue;
        }
        let fd = central_difference(metric, img, i, step)?;
        let analytic = gradient.data()[i];
        let rel = (analytic - fd).abs() / f64::max(1e-12, fd.abs());
        max_rel = max_rel.max(rel);
        checked += 1;
    }
    assert!(
        checked == probes,
        "could not place {probes} probes inside [step, 1-step]"
    );
    Ok(max_rel)
}

fn central_difference(metric: &dyn Metric, img: &Image, i: usize, step: f64) -> Result<f64> {
    let mut data = img.data().to_vec();
    data[i] += step;
    let plus = metric.score(&Image::new(img.height(), img.width(), data.clone())?)?;
    data[i] = img.data()[i] - step;
    let minus = metric.score(&Image::new(img.height(), img.width(), data)?)?;
    Ok((plus - minus) / (2.0 * step))
}

/// Central finite differences of an arbitrary scalar function over a flat
/// parameter vector; shared by the regularizer and loss tests.
#[cfg(test)]
pub(crate) fn fd_scalar(
    f: &mut dyn FnMut(&[f64]) -> f64,
    params: &[f64],
    i: usize,
    step: f64,
) -> f64 {
    let mut p = params.to_vec();
    p[i] = params[i] + step;
    let plus = f(&p);
    p[i] = params[i] - step;
    let minus = f(&p);
    (plus - minus) / (2.0 * step)
}

const _: () = assert!(CHANNELS == 3);
