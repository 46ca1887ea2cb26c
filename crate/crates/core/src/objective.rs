//! The training objective: attack loss plus total-variation and
//! non-printability regularizers, with exact analytic gradients with respect
//! to the patch pixels.
//!
//! Both regularizers smooth their square roots with `EPSILON = 1e-8` so the
//! gradient exists everywhere; values stay faithful to the unsmoothed forms.

use crate::error::{Error, Result};
use crate::imagery::{Image, Patch, Placement, Tensor, CHANNELS};
use crate::metrics::Metric;
use crate::parallel::par_map_range;
use crate::patch_ops::{rotate90, rotate_tensor90};

/// Smoothing constant under the square roots of TV and NPS.
pub const EPSILON: f64 = 1e-8;

/// Set of printable RGB triplets.
#[derive(Clone, Debug, PartialEq)]
pub struct Palette {
    name: String,
    colors: Vec<[f64; 3]>,
}

impl Palette {
    /// At most 64 entries (the per-pixel distance product underflows beyond
    /// that), all distinct, all inside the RGB cube.
    pub fn new(name: &str, colors: Vec<[f64; 3]>) -> Result<Self> {
        if colors.is_empty() {
            return Err(Error::InvalidPalette("palette is empty".into()));
        }
        if colors.len() > 64 {
            return Err(Error::InvalidPalette(format!(
                "{} entries exceed the maximum of 64",
                colors.len()
            )));
        }
        for (i, c) in colors.iter().enumerate() {
            if c.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::InvalidPalette(format!(
                    "entry {i} {c:?} outside [0,1]^3"
                )));
            }
            if colors[..i].contains(c) {
                return Err(Error::InvalidPalette(format!(
                    "duplicate entry {c:?} at index {i}"
                )));
            }
        }
        Ok(Self {
            name: name.to_string(),
            colors,
        })
    }

    /// The default 30-color printable set: the 3-level-per-channel lattice
    /// (27 points, red-major order) plus three extra grays.
    pub fn default_printable() -> Self {
        let levels = [0.0, 0.5, 1.0];
        let mut colors = Vec::with_capacity(30);
        for r in levels {
            for g in levels {
                for b in levels {
                    colors.push([r, g, b]);
                }
            }
        }
        colors.push([0.25, 0.25, 0.25]);
        colors.push([0.75, 0.75, 0.75]);
        colors.push([0.875, 0.875, 0.875]);
        Self::new("printable-30", colors).expect("default palette is valid")
    }

    /// Parses the text palette format: one `r g b` float triple per line,
    /// `#` starts a comment.
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut colors = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(Error::InvalidPalette(format!(
                    "line {}: expected 3 components, got {}",
                    lineno + 1,
                    parts.len()
                )));
            }
            let mut c = [0.0f64; 3];
            for (i, s) in parts.iter().enumerate() {
                c[i] = s.parse().map_err(|_| {
                    Error::InvalidPalette(format!("line {}: bad float {s:?}", lineno + 1))
                })?;
            }
            colors.push(c);
        }
        Self::new(name, colors)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.into(),
            source,
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "palette".into());
        Self::parse(&name, &text)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn colors(&self) -> &[[f64; 3]] {
        &self.colors
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Regularizer strengths. Both zero reproduces the plain attack objective.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LossWeights {
    pub lambda_tv: f64,
    pub lambda_nps: f64,
}

impl LossWeights {
    pub fn new(lambda_tv: f64, lambda_nps: f64) -> Result<Self> {
        if lambda_tv < 0.0 || lambda_nps < 0.0 || !lambda_tv.is_finite() || !lambda_nps.is_finite()
        {
            return Err(Error::InvalidWeights(format!(
                "weights must be finite and non-negative, got tv={lambda_tv} nps={lambda_nps}"
            )));
        }
        Ok(Self {
            lambda_tv,
            lambda_nps,
        })
    }

    pub fn zero() -> Self {
        Self {
            lambda_tv: 0.0,
            lambda_nps: 0.0,
        }
    }
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            lambda_tv: 1e-4,
            lambda_nps: 1e-2,
        }
    }
}

/// One evaluation of the combined objective.
#[derive(Clone, Debug)]
pub struct LossBreakdown {
    /// Mean of `1 - score/m_range` over the batch.
    pub attack: f64,
    /// Raw total-variation value of the patch.
    pub tv: f64,
    /// Raw non-printability value of the patch.
    pub nps: f64,
    /// `attack + lambda_tv*tv + lambda_nps*nps`.
    pub total: f64,
    /// Gradient of `total` w.r.t. the patch pixels, `3 x D x D`.
    pub grad_patch: Tensor,
}

/// Normalized attack loss `1 - score/m_range`.
pub fn attack_loss(score: f64, m_range: f64) -> Result<f64> {
    if m_range <= 0.0 {
        return Err(Error::NonPositiveRange(m_range));
    }
    Ok(1.0 - score / m_range)
}

/// Smoothed isotropic total variation with forward differences; terms whose
/// neighbour falls off the last row/column drop that difference. Returns the
/// value and its exact gradient.
pub fn tv(p: &Patch) -> (f64, Tensor) {
    let d = p.size();
    let img = p.pixels();
    let mut value = 0.0;
    let mut grad = Tensor::zeros(d, d);
    for c in 0..CHANNELS {
        for i in 0..d {
            for j in 0..d {
                let here = img.get(c, i, j);
                let dv = if i + 1 < d { here - img.get(c, i + 1, j) } else { 0.0 };
                let dh = if j + 1 < d { here - img.get(c, i, j + 1) } else { 0.0 };
                let t = (dv * dv + dh * dh + EPSILON).sqrt();
                value += t;
                grad.add(c, i, j, (dv + dh) / t);
                if i + 1 < d {
                    grad.add(c, i + 1, j, -dv / t);
                }
                if j + 1 < d {
                    grad.add(c, i, j + 1, -dh / t);
                }
            }
        }
    }
    (value, grad)
}

/// Smoothed non-printability score: per pixel the product over palette
/// entries of the Euclidean RGB distance, summed over pixels. Products run in
/// log space for palettes larger than 16 entries to dodge underflow.
pub fn nps(p: &Patch, palette: &Palette) -> (f64, Tensor) {
    let d = p.size();
    let img = p.pixels();
    let colors = palette.colors();
    let log_space = colors.len() > 16;
    let mut value = 0.0;
    let mut grad = Tensor::zeros(d, d);
    let mut inv_q = vec![0.0f64; colors.len()];
    for y in 0..d {
        for x in 0..d {
            let px = img.pixel(y, x);
            let v = if log_space {
                let mut log_sum = 0.0;
                for (k, t) in colors.iter().enumerate() {
                    let q = squared_distance(&px, t) + EPSILON;
                    inv_q[k] = 1.0 / q;
                    log_sum += q.ln();
                }
                (0.5 * log_sum).exp()
            } else {
                let mut prod = 1.0;
                for (k, t) in colors.iter().enumerate() {
                    let q = squared_distance(&px, t) + EPSILON;
                    inv_q[k] = 1.0 / q;
                    prod *= q.sqrt();
                }
                prod
            };
            value += v;
            // d v / d px_c = v * sum_t (px_c - t_c) / (|px - t|^2 + eps)
            for c in 0..CHANNELS {
                let mut s = 0.0;
                for (k, t) in colors.iter().enumerate() {
                    s += (px[c] - t[c]) * inv_q[k];
                }
                grad.add(c, y, x, v * s);
            }
        }
    }
    (value, grad)
}

#[inline]
fn squared_distance(px: &[f64; 3], t: &[f64; 3]) -> f64 {
    let dr = px[0] - t[0];
    let dg = px[1] - t[1];
    let db = px[2] - t[2];
    dr * dr + dg * dg + db * db
}

/// Evaluates the combined objective over a mini-batch.
///
/// Per item the patch is rotated and composited at its placement, optionally
/// brightness-shifted by `relight_deltas[i]` and clamped, then scored. The
/// attack term is the batch mean of `1 - score/m_range`; its gradient routes
/// each metric image-gradient through the compositing: footprint entries are
/// extracted (zeroed where the relight clamp was active) and inverse-rotated
/// back into patch coordinates. Items are evaluated in parallel and reduced
/// in batch order, so the result is deterministic.
#[allow(clippy::too_many_arguments)]
pub fn total_loss(
    batch: &[&Image],
    p: &Patch,
    placements: &[Placement],
    metric: &dyn Metric,
    weights: &LossWeights,
    palette: &Palette,
    m_range: f64,
    relight_deltas: Option<&[f64]>,
) -> Result<LossBreakdown> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if placements.len() != batch.len() {
        return Err(Error::BatchMismatch(format!(
            "{} placements for {} images",
            placements.len(),
            batch.len()
        )));
    }
    if let Some(deltas) = relight_deltas {
        if deltas.len() != batch.len() {
            return Err(Error::BatchMismatch(format!(
                "{} relight deltas for {} images",
                deltas.len(),
                batch.len()
            )));
        }
    }
    if m_range <= 0.0 {
        return Err(Error::NonPositiveRange(m_range));
    }
    let d = p.size();
    for (img, pl) in batch.iter().zip(placements) {
        pl.validate(img.height(), img.width(), d)?;
    }

    let items: Vec<Result<(f64, Tensor)>> = par_map_range(batch.len(), |i| {
        let img = batch[i];
        let pl = &placements[i];
        let rotated = rotate90(p, pl.rot);
        let composited = crate::patch_ops::apply_patch(img, p, pl)?;
        let delta = relight_deltas.map(|ds| ds[i]);
        let scored = match delta {
            Some(dl) => crate::patch_ops::shift_clamp(&composited, dl),
            None => composited,
        };
        let eval = metric.evaluate(&scored)?;
        let loss = attack_loss(eval.score, m_range)?;
        // Extract the footprint block of the image gradient; where the
        // relight clamp fired the derivative is zero.
        let mut block = Tensor::zeros(d, d);
        for c in 0..CHANNELS {
            for r in 0..d {
                for col in 0..d {
                    let mut g = eval.gradient.get(c, pl.y + r, pl.x + col);
                    if let Some(dl) = delta {
                        let pre = rotated.pixels().get(c, r, col) + dl;
                        if !(0.0 < pre && pre < 1.0) {
                            g = 0.0;
                        }
                    }
                    block.set(c, r, col, g);
                }
            }
        }
        let routed = rotate_tensor90(&block, pl.rot.inverse());
        Ok((loss, routed))
    });

    let b = batch.len() as f64;
    let mut attack = 0.0;
    let mut grad = Tensor::zeros(d, d);
    for item in items {
        let (loss, routed) = item?;
        attack += loss / b;
        grad.add_scaled(&routed, -1.0 / (b * m_range));
    }

    let (tv_value, tv_grad) = tv(p);
    let (nps_value, nps_grad) = nps(p, palette);
    grad.add_scaled(&tv_grad, weights.lambda_tv);
    grad.add_scaled(&nps_grad, weights.lambda_nps);
    let total = attack + weights.lambda_tv * tv_value + weights.lambda_nps * nps_value;
    debug_assert!(grad.all_finite());
    Ok(LossBreakdown {
        attack,
        tv: tv_value,
        nps: nps_value,
        total,
        grad_patch: grad,
    })
}
