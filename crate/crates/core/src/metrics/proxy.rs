//! Closed-form reference metric built from three hand-crafted sharpness and
//! colorfulness features.
//!
//! The score is `100 * sigmoid(SLOPE * (F - BIAS))` where
//! `F = w_c*contrast + w_s*saturation + w_h*sharpness` and
//!
//! - `contrast`  = mean squared deviation from a 3x3 box blur,
//! - `saturation` = mean across-channel variance per pixel,
//! - `sharpness` = mean squared 4-neighbour Laplacian.
//!
//! Both filters use replicate (clamp-to-edge) borders. A featureless frame
//! has `F = 0`, so a flat mid-gray image scores
//! `100 * sigmoid(-SLOPE*BIAS)` (about 48 with the constants below); the bias
//! is half the feature sum `REF_*` measured on a mildly noisy reference
//! frame, which centres typical textured content near the middle of the
//! scale. The gradient is the exact analytic derivative via the adjoints of
//! the two filters.

use super::{check_min_side, sigmoid, Metric, MetricDescriptor, MetricEval};
use crate::error::Result;
use crate::imagery::{Image, Tensor, CHANNELS};

pub(crate) const W_CONTRAST: f64 = 1.0;
pub(crate) const W_SATURATION: f64 = 1.0;
pub(crate) const W_SHARPNESS: f64 = 0.05;
pub(crate) const REF_CONTRAST: f64 = 0.01;
pub(crate) const REF_SATURATION: f64 = 0.005;
pub(crate) const REF_SHARPNESS: f64 = 0.3;
pub(crate) const SLOPE: f64 = 6.0;

pub(crate) fn bias() -> f64 {
    0.5 * (W_CONTRAST * REF_CONTRAST + W_SATURATION * REF_SATURATION + W_SHARPNESS * REF_SHARPNESS)
}

pub struct ProxyMetric {
    descriptor: MetricDescriptor,
}

impl ProxyMetric {
    pub fn new() -> Self {
        Self {
            descriptor: MetricDescriptor::new("proxy", 0.0, 100.0, 8),
        }
    }

    fn features(&self, img: &Image) -> ProxyForward {
        let (h, w) = (img.height(), img.width());
        let n = (CHANNELS * h * w) as f64;
        let n_pix = (h * w) as f64;

        let mut residuals = Vec::with_capacity(CHANNELS);
        let mut laplacians = Vec::with_capacity(CHANNELS);
        let mut contrast_sum = 0.0;
        let mut sharp_sum = 0.0;
        for c in 0..CHANNELS {
            let plane = plane(img, c);
            let blur = box_blur3(plane, h, w);
            let res: Vec<f64> = plane.iter().zip(&blur).map(|(x, b)| x - b).collect();
            contrast_sum += res.iter().map(|r| r * r).sum::<f64>();
            let lap = laplacian4(plane, h, w);
            sharp_sum += lap.iter().map(|l| l * l).sum::<f64>();
            residuals.push(res);
            laplacians.push(lap);
        }

        let mut sat_sum = 0.0;
        for y in 0..h {
            for x in 0..w {
                let px = img.pixel(y, x);
                let mu = (px[0] + px[1] + px[2]) / 3.0;
                sat_sum += px.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / 3.0;
            }
        }

        let contrast = contrast_sum / n;
        let saturation = sat_sum / n_pix;
        let sharpness = sharp_sum / n;
        let f = W_CONTRAST * contrast + W_SATURATION * saturation + W_SHARPNESS * sharpness;
        let s = sigmoid(SLOPE * (f - bias()));
        ProxyForward {
            residuals,
            laplacians,
            score: 100.0 * s,
            sig: s,
        }
    }
}

impl Default for ProxyMetric {
    fn default() -> Self {
        Self::new()
    }
}

struct ProxyForward {
    residuals: Vec<Vec<f64>>,
    laplacians: Vec<Vec<f64>>,
    score: f64,
    sig: f64,
}

impl Metric for ProxyMetric {
    fn descriptor(&self) -> &MetricDescriptor {
        &self.descriptor
    }

    fn evaluate(&self, img: &Image) -> Result<MetricEval> {
        check_min_side(&self.descriptor, img)?;
        let (h, w) = (img.height(), img.width());
        let n = (CHANNELS * h * w) as f64;
        let n_pix = (h * w) as f64;
        let fwd = self.features(img);

        // d score / d F
        let dscore_df = 100.0 * fwd.sig * (1.0 - fwd.sig) * SLOPE;

        let mut grad = Tensor::zeros(h, w);
        for c in 0..CHANNELS {
            let res = &fwd.residuals[c];
            // contrast: (2/N) * (r - B^T r)
            let bt = box_blur3_adjoint(res, h, w);
            let lap = &fwd.laplacians[c];
            // sharpness: (2/N) * L^T L
            let lt = laplacian4_adjoint(lap, h, w);
            let out = &mut grad.data_mut()[c * h * w..(c + 1) * h * w];
            for i in 0..h * w {
                out[i] = dscore_df
                    * (W_CONTRAST * 2.0 / n * (res[i] - bt[i])
                        + W_SHARPNESS * 2.0 / n * lt[i]);
            }
        }
        // saturation: (2 / (3*Npix)) * (x_c - mu)
        for y in 0..h {
            for x in 0..w {
                let px = img.pixel(y, x);
                let mu = (px[0] + px[1] + px[2]) / 3.0;
                for (c, v) in px.iter().enumerate() {
                    grad.add(
                        c,
                        y,
                        x,
                        dscore_df * W_SATURATION * 2.0 / (3.0 * n_pix) * (v - mu),
                    );
                }
            }
        }

        debug_assert!(grad.all_finite());
        Ok(MetricEval {
            score: fwd.score,
            gradient: grad,
        })
    }

    fn score(&self, img: &Image) -> Result<f64> {
        check_min_side(&self.descriptor, img)?;
        Ok(self.features(img).score)
    }
}

fn plane(img: &Image, c: usize) -> &[f64] {
    let hw = img.height() * img.width();
    &img.data()[c * hw..(c + 1) * hw]
}

#[inline]
fn clamp_idx(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// 3x3 box blur with replicate borders.
pub(crate) fn box_blur3(plane: &[f64], h: usize, w: usize) -> Vec<f64> {
    let mut out = vec![0.0; h * w];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    acc += plane[clamp_idx(y as isize + dy, h) * w + clamp_idx(x as isize + dx, w)];
                }
            }
            out[y * w + x] = acc / 9.0;
        }
    }
    out
}

/// Adjoint of [`box_blur3`]: scatters each output cell back onto the nine
/// (clamped) source cells it read from.
pub(crate) fn box_blur3_adjoint(grad_out: &[f64], h: usize, w: usize) -> Vec<f64> {
    let mut out = vec![0.0; h * w];
    for y in 0..h {
        for x in 0..w {
            let g = grad_out[y * w + x] / 9.0;
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    out[clamp_idx(y as isize + dy, h) * w + clamp_idx(x as isize + dx, w)] += g;
                }
            }
        }
    }
    out
}

/// 4-neighbour Laplacian `4x - up - down - left - right` with replicate
/// borders. Constant inputs map to zero everywhere, borders included.
pub(crate) fn laplacian4(plane: &[f64], h: usize, w: usize) -> Vec<f64> {
    let mut out = vec![0.0; h * w];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = 4.0 * plane[y * w + x]
                - plane[clamp_idx(y as isize - 1, h) * w + x]
                - plane[clamp_idx(y as isize + 1, h) * w + x]
                - plane[y * w + clamp_idx(x as isize - 1, w)]
                - plane[y * w + clamp_idx(x as isize + 1, w)];
        }
    }
    out
}

pub(crate) fn laplacian4_adjoint(grad_out: &[f64], h: usize, w: usize) -> Vec<f64> {
    let mut out = vec![0.0; h * w];
    for y in 0..h {
        for x in 0..w {
            let g = grad_out[y * w + x];
            out[y * w + x] += 4.0 * g;
            out[clamp_idx(y as isize - 1, h) * w + x] -= g;
            out[clamp_idx(y as isize + 1, h) * w + x] -= g;
            out[y * w + clamp_idx(x as isize - 1, w)] -= g;
            out[y * w + clamp_idx(x as isize + 1, w)] -= g;
        }
    }
    out
}
