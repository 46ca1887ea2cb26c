//! Desk-scale stand-in for print-and-capture experiments: a parametric
//! distortion pipeline (resize, lighting, gamma, gamut, blur, sensor noise,
//! block-DCT compression, optional keystone warp) and the wallpaper
//! protocol scored against the clean background.
//!
//! Stage parameters model distortion classes, not calibrated hardware; the
//! noise stage is the only stochastic one, so a pipeline without it ignores
//! its random stream entirely.

use crate::error::{Error, Result};
use crate::imagery::{Image, Patch, RngStream, CHANNELS};
use crate::metrics::Metric;
use crate::objective::Palette;
use crate::patch_ops::{shift_clamp, tile_patch, TileSpec};

/// One distortion stage with its parameters.
#[derive(Clone, Debug)]
pub enum Stage {
    /// Bilinear downscale by `factor` in (0, 1], then letterbox back to the
    /// original dimensions on a mid-gray canvas. Emulates viewing distance.
    Scale { factor: f64 },
    /// Global brightness shift, clamped.
    Brightness { delta: f64 },
    /// Power-law tone curve, `gamma` in [0.5, 2].
    Gamma { gamma: f64 },
    /// Pulls every pixel toward its nearest palette color by `strength` in
    /// [0, 1]; models a limited print/display gamut.
    GamutClip { palette: Palette, strength: f64 },
    /// Repeated 3x3 binomial blur passes (replicate borders).
    Blur { passes: u32 },
    /// Additive per-sample Gaussian noise with standard deviation `sigma`,
    /// clamped. The only stochastic stage.
    Noise { sigma: f64 },
    /// 8x8 block DCT quantization with a JPEG-style luminance table at
    /// `quality` in [10, 95], applied per RGB channel.
    BlockDctQuant { quality: u32 },
    /// Keystone warp: row-dependent horizontal scaling by up to `tilt` in
    /// [-0.5, 0.5], bilinear resample with clamped edges. Off the default
    /// pipeline; captures were assumed frontal.
    Perspective { tilt: f64 },
}

impl Stage {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidStageParam(msg));
        match self {
            Stage::Scale { factor } => {
                if !(*factor > 0.0 && *factor <= 1.0) {
                    return bad(format!("scale factor {factor} outside (0, 1]"));
                }
            }
            Stage::Brightness { delta } => {
                if delta.abs() >= 1.0 || delta.is_nan() {
                    return bad(format!("brightness delta {delta} outside (-1, 1)"));
                }
            }
            Stage::Gamma { gamma } => {
                if !(0.5..=2.0).contains(gamma) {
                    return bad(format!("gamma {gamma} outside [0.5, 2]"));
                }
            }
            Stage::GamutClip { strength, .. } => {
                if !(0.0..=1.0).contains(strength) {
                    return bad(format!("gamut strength {strength} outside [0, 1]"));
                }
            }
            Stage::Blur { passes } => {
                if *passes > 16 {
                    return bad(format!("{passes} blur passes exceed the limit of 16"));
                }
            }
            Stage::Noise { sigma } => {
                if !(0.0..=0.5).contains(sigma) {
                    return bad(format!("noise sigma {sigma} outside [0, 0.5]"));
                }
            }
            Stage::BlockDctQuant { quality } => {
                if !(10..=95).contains(quality) {
                    return bad(format!("quality {quality} outside [10, 95]"));
                }
            }
            Stage::Perspective { tilt } => {
                if !(-0.5..=0.5).contains(tilt) {
                    return bad(format!("tilt {tilt} outside [-0.5, 0.5]"));
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Stage::Scale { .. } => "scale",
            Stage::Brightness { .. } => "brightness",
            Stage::Gamma { .. } => "gamma",
            Stage::GamutClip { .. } => "gamut_clip",
            Stage::Blur { .. } => "blur",
            Stage::Noise { .. } => "noise",
            Stage::BlockDctQuant { .. } => "block_dct_quant",
            Stage::Perspective { .. } => "perspective",
        }
    }
}

/// Ordered distortion chain. Empty means identity.
#[derive(Clone, Debug, Default)]
pub struct CamPipeline {
    pub stages: Vec<Stage>,
}

impl CamPipeline {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn new(stages: Vec<Stage>) -> Result<Self> {
        let pipe = Self { stages };
        pipe.validate()?;
        Ok(pipe)
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.stages {
            s.validate()?;
        }
        Ok(())
    }
}

/// Named viewing-distance scale factors; nearer is larger by pinhole
/// proportionality relative to the closest distance.
#[derive(Clone, Debug)]
pub struct DistanceProfile {
    pub entries: Vec<(String, f64)>,
}

impl Default for DistanceProfile {
    fn default() -> Self {
        Self {
            entries: vec![
                ("near".into(), 1.0),
                ("mid".into(), 0.88),
                ("far".into(), 0.79),
            ],
        }
    }
}

impl DistanceProfile {
    pub fn validate(&self) -> Result<()> {
        for (name, f) in &self.entries {
            if !(*f > 0.0 && *f <= 1.0) {
                return Err(Error::InvalidStageParam(format!(
                    "distance {name:?} factor {f} outside (0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Applies the pipeline stages in order. Output keeps the input dimensions
/// and stays in `[0, 1]`; deterministic given the stream.
pub fn simulate(img: &Image, pipe: &CamPipeline, rng: &mut RngStream) -> Result<Image> {
    pipe.validate()?;
    let mut out = img.clone();
    for stage in &pipe.stages {
        out = match stage {
            Stage::Scale { factor } => scale_letterbox(&out, *factor),
            Stage::Brightness { delta } => shift_clamp(&out, *delta),
            Stage::Gamma { gamma } => apply_gamma(&out, *gamma),
            Stage::GamutClip { palette, strength } => gamut_clip(&out, palette, *strength),
            Stage::Blur { passes } => blur_binomial(&out, *passes),
            Stage::Noise { sigma } => add_noise(&out, *sigma, rng),
            Stage::BlockDctQuant { quality } => block_dct_quant(&out, *quality),
            Stage::Perspective { tilt } => keystone(&out, *tilt),
        };
    }
    Ok(out)
}

/// Wallpaper protocol under a capture pipeline: the patch is tiled over the
/// whole background and both sides are simulated, so
/// `gain = M(sim(tiled)) - M(sim(background))`. The tiled side consumes the
/// stream first.
pub fn wallpaper_gain(
    background: &Image,
    patch: &Patch,
    pipe: &CamPipeline,
    metric: &dyn Metric,
    rng: &mut RngStream,
) -> Result<f64> {
    let spec = TileSpec::full_frame(background.height(), background.width());
    let tiled = tile_patch(background, patch, &spec)?;
    let attacked = simulate(&tiled, pipe, rng)?;
    let clean = simulate(background, pipe, rng)?;
    Ok(metric.score(&attacked)? - metric.score(&clean)?)
}

/// Wallpaper gain at every distance in the profile: the distance's scale
/// stage is prepended to the base pipeline.
pub fn wallpaper_distance_curve(
    background: &Image,
    patch: &Patch,
    base: &CamPipeline,
    profile: &DistanceProfile,
    metric: &dyn Metric,
    rng: &mut RngStream,
) -> Result<Vec<(String, f64)>> {
    profile.validate()?;
    let mut out = Vec::with_capacity(profile.entries.len());
    for (name, factor) in &profile.entries {
        let mut stages = vec![Stage::Scale { factor: *factor }];
        stages.extend(base.stages.iter().cloned());
        let pipe = CamPipeline::new(stages)?;
        let gain = wallpaper_gain(background, patch, &pipe, metric, rng)?;
        out.push((name.clone(), gain));
    }
    Ok(out)
}

fn scale_letterbox(img: &Image, factor: f64) -> Image {
    if factor == 1.0 {
        return img.clone();
    }
    let (h, w) = (img.height(), img.width());
    let sh = ((h as f64 * factor).round() as usize).max(1);
    let sw = ((w as f64 * factor).round() as usize).max(1);
    // Bilinear sample of the source at the scaled grid.
    let scaled = Image::from_fn(sh, sw, |c, y, x| {
        let fy = (y as f64 + 0.5) / sh as f64 * h as f64 - 0.5;
        let fx = (x as f64 + 0.5) / sw as f64 * w as f64 - 0.5;
        bilinear(img, c, fy, fx)
    })
    .expect("bilinear of valid samples stays valid");
    // Letterbox centered on mid-gray.
    let (oy, ox) = ((h - sh) / 2, (w - sw) / 2);
    Image::from_fn(h, w, |c, y, x| {
        if y >= oy && y < oy + sh && x >= ox && x < ox + sw {
            scaled.get(c, y - oy, x - ox)
        } else {
            0.5
        }
    })
    .expect("letterbox stays valid")
}

fn bilinear(img: &Image, c: usize, fy: f64, fx: f64) -> f64 {
    let (h, w) = (img.height(), img.width());
    let fy = fy.clamp(0.0, h as f64 - 1.0);
    let fx = fx.clamp(0.0, w as f64 - 1.0);
    let y0 = fy.floor() as usize;
    let x0 = fx.floor() as usize;
    let y1 = (y0 + 1).min(h - 1);
    let x1 = (x0 + 1).min(w - 1);
    let ty = fy - y0 as f64;
    let tx = fx - x0 as f64;
    img.get(c, y0, x0) * (1.0 - ty) * (1.0 - tx)
        + img.get(c, y0, x1) * (1.0 - ty) * tx
        + img.get(c, y1, x0) * ty * (1.0 - tx)
        + img.get(c, y1, x1) * ty * tx
}

fn apply_gamma(img: &Image, gamma: f64) -> Image {
    let data = img.data().iter().map(|v| v.powf(gamma).clamp(0.0, 1.0)).collect();
    Image::new(img.height(), img.width(), data).expect("gamma keeps range")
}

fn gamut_clip(img: &Image, palette: &Palette, strength: f64) -> Image {
    Image::from_fn(img.height(), img.width(), |c, y, x| {
        let px = img.pixel(y, x);
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (k, t) in palette.colors().iter().enumerate() {
            let d = (px[0] - t[0]).powi(2) + (px[1] - t[1]).powi(2) + (px[2] - t[2]).powi(2);
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        let t = palette.colors()[best];
        (px[c] + strength * (t[c] - px[c])).clamp(0.0, 1.0)
    })
    .expect("blend keeps range")
}

fn blur_binomial(img: &Image, passes: u32) -> Image {
    let (h, w) = (img.height(), img.width());
    let mut data = img.data().to_vec();
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
    for _ in 0..passes {
        let mut next = vec![0.0; data.len()];
        for c in 0..CHANNELS {
            let plane = &data[c * h * w..(c + 1) * h * w];
            let out = &mut next[c * h * w..(c + 1) * h * w];
            // Separable [1 2 1]/4 in each direction.
            let mut tmp = vec![0.0; h * w];
            for y in 0..h {
                for x in 0..w {
                    tmp[y * w + x] = 0.25
                        * (plane[y * w + clamp(x as isize - 1, w)]
                            + 2.0 * plane[y * w + x]
                            + plane[y * w + clamp(x as isize + 1, w)]);
                }
            }
            for y in 0..h {
                for x in 0..w {
                    out[y * w + x] = 0.25
                        * (tmp[clamp(y as isize - 1, h) * w + x]
                            + 2.0 * tmp[y * w + x]
                            + tmp[clamp(y as isize + 1, h) * w + x]);
                }
            }
        }
        data = next;
    }
    for v in &mut data {
        *v = v.clamp(0.0, 1.0);
    }
    Image::new(h, w, data).expect("blur keeps range")
}

fn add_noise(img: &Image, sigma: f64, rng: &mut RngStream) -> Image {
    let data = img
        .data()
        .iter()
        .map(|v| (v + sigma * rng.gaussian()).clamp(0.0, 1.0))
        .collect();
    Image::new(img.height(), img.width(), data).expect("clamped")
}

/// Standard JPEG luminance quantization table, row-major.
const QUANT_BASE: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

fn quant_table(quality: u32) -> [f64; 64] {
    let scale = if quality < 50 {
        5000.0 / quality as f64
    } else {
        200.0 - 2.0 * quality as f64
    };
    let mut q = [0.0; 64];
    for i in 0..64 {
        q[i] = ((QUANT_BASE[i] as f64 * scale + 50.0) / 100.0).floor().clamp(1.0, 255.0);
    }
    q
}

/// Orthonormal 8-point DCT-II basis, `C[u][y] = a(u) cos((2y+1)u pi / 16)`.
fn dct_basis() -> [[f64; 8]; 8] {
    let mut c = [[0.0; 8]; 8];
    for (u, row) in c.iter_mut().enumerate() {
        let a = if u == 0 {
            (1.0f64 / 8.0).sqrt()
        } else {
            (2.0f64 / 8.0).sqrt()
        };
        for (y, v) in row.iter_mut().enumerate() {
            *v = a * ((2 * y + 1) as f64 * u as f64 * std::f64::consts::PI / 16.0).cos();
        }
    }
    c
}

#[allow(clippy::needless_range_loop)] // index loops read clearer in the transform kernels
fn block_dct_quant(img: &Image, quality: u32) -> Image {
    let (h, w) = (img.height(), img.width());
    let q = quant_table(quality);
    let basis = dct_basis();
    let ph = h.div_ceil(8) * 8;
    let pw = w.div_ceil(8) * 8;
    let mut out = vec![0.0f64; CHANNELS * h * w];
    let mut padded = vec![0.0f64; ph * pw];
    for c in 0..CHANNELS {
        // Replicate-pad the plane to 8x8 multiples, centered at zero in the
        // 0..255 domain the table is defined for.
        for y in 0..ph {
            for x in 0..pw {
                let sy = y.min(h - 1);
                let sx = x.min(w - 1);
                padded[y * pw + x] = img.get(c, sy, sx) * 255.0 - 128.0;
            }
        }
        for by in (0..ph).step_by(8) {
            for bx in (0..pw).step_by(8) {
                let mut block = [[0.0f64; 8]; 8];
                for (y, row) in block.iter_mut().enumerate() {
                    for (x, v) in row.iter_mut().enumerate() {
                        *v = padded[(by + y) * pw + bx + x];
                    }
                }
                // F = C B C^T, quantize, B' = C^T F' C.
                let mut tmp = [[0.0f64; 8]; 8];
                for u in 0..8 {
                    for x in 0..8 {
                        tmp[u][x] = (0..8).map(|y| basis[u][y] * block[y][x]).sum();
                    }
                }
                let mut coef = [[0.0f64; 8]; 8];
                for u in 0..8 {
                    for v in 0..8 {
                        coef[u][v] = (0..8).map(|x| tmp[u][x] * basis[v][x]).sum();
                    }
                }
                for u in 0..8 {
                    for v in 0..8 {
                        let qv = q[u * 8 + v];
                        coef[u][v] = (coef[u][v] / qv).round() * qv;
                    }
                }
                for (y, row) in tmp.iter_mut().enumerate() {
                    for (x, v) in row.iter_mut().enumerate() {
                        *v = (0..8).map(|u| basis[u][y] * coef[u][x]).sum();
                    }
                }
                for (y, trow) in tmp.iter().enumerate() {
                    for x in 0..8 {
                        let v: f64 = (0..8).map(|u| trow[u] * basis[u][x]).sum();
                        let (gy, gx) = (by + y, bx + x);
                        if gy < h && gx < w {
                            out[(c * h + gy) * w + gx] = ((v + 128.0) / 255.0).clamp(0.0, 1.0);
                        }
                    }
                }
            }
        }
    }
    Image::new(h, w, out).expect("reconstruction clamped")
}

fn keystone(img: &Image, tilt: f64) -> Image {
    if tilt == 0.0 {
        return img.clone();
    }
    let (h, w) = (img.height(), img.width());
    let cx = (w as f64 - 1.0) / 2.0;
    Image::from_fn(h, w, |c, y, x| {
        let row_t = if h > 1 { y as f64 / (h as f64 - 1.0) } else { 0.0 };
        let scale = 1.0 + tilt * (row_t - 0.5);
        let fx = cx + (x as f64 - cx) * scale;
        bilinear(img, c, y as f64, fx)
    })
    .expect("bilinear keeps range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagery::{PatchMeta, Seed};
    use crate::metrics::ProxyMetric;

    fn random_image(h: usize, w: usize, seed: u64) -> Image {
        let mut rng = RngStream::new(Seed(seed), "cam-img");
        Image::from_fn(h, w, |_, _, _| rng.uniform_f64()).unwrap()
    }

    fn mid_image(h: usize, w: usize, seed: u64) -> Image {
        let mut rng = RngStream::new(Seed(seed), "cam-mid");
        Image::from_fn(h, w, |_, _, _| rng.range_f64(0.3, 0.7)).unwrap()
    }

    fn random_patch(d: usize, seed: u64) -> Patch {
        let mut rng = RngStream::new(Seed(seed), "cam-patch");
        let img = Image::from_fn(d, d, |_, _, _| rng.uniform_f64()).unwrap();
        Patch::new(img, PatchMeta::default()).unwrap()
    }

    #[test]
    fn empty_pipeline_is_identity() {
        let img = random_image(24, 24, 1);
        let mut rng = RngStream::new(Seed(1), "sim");
        let out = simulate(&img, &CamPipeline::identity(), &mut rng).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn brightness_only_shifts_uniformly() {
        let img = mid_image(16, 16, 2);
        let pipe = CamPipeline::new(vec![Stage::Brightness { delta: 0.1 }]).unwrap();
        let mut rng = RngStream::new(Seed(2), "sim");
        let out = simulate(&img, &pipe, &mut rng).unwrap();
        for (a, b) in out.data().iter().zip(img.data()) {
            assert!((a - b - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn dct_distortion_grows_as_quality_drops() {
        let img = random_image(32, 32, 3);
        let mut err = std::collections::BTreeMap::new();
        for q in [20u32, 95] {
            let pipe = CamPipeline::new(vec![Stage::BlockDctQuant { quality: q }]).unwrap();
            let mut rng = RngStream::new(Seed(3), "sim");
            let out = simulate(&img, &pipe, &mut rng).unwrap();
            let mean_abs: f64 = out
                .data()
                .iter()
                .zip(img.data())
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
                / img.len() as f64;
            err.insert(q, mean_abs);
        }
        assert!(err[&95] < err[&20], "q95 {} !< q20 {}", err[&95], err[&20]);
    }

    #[test]
    fn stages_preserve_shape_and_range() {
        let img = random_image(30, 22, 4);
        let stages = vec![
            Stage::Scale { factor: 0.79 },
            Stage::Brightness { delta: -0.12 },
            Stage::Gamma { gamma: 1.4 },
            Stage::GamutClip {
                palette: Palette::default_printable(),
                strength: 0.5,
            },
            Stage::Blur { passes: 2 },
            Stage::Noise { sigma: 0.02 },
            Stage::BlockDctQuant { quality: 40 },
            Stage::Perspective { tilt: 0.2 },
        ];
        let pipe = CamPipeline::new(stages).unwrap();
        let mut rng = RngStream::new(Seed(4), "sim");
        let out = simulate(&img, &pipe, &mut rng).unwrap();
        assert_eq!((out.height(), out.width()), (30, 22));
        assert!(out.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn noise_is_the_only_stochastic_stage() {
        let img = random_image(16, 16, 5);
        let deterministic = CamPipeline::new(vec![
            Stage::Gamma { gamma: 0.8 },
            Stage::Blur { passes: 1 },
        ])
        .unwrap();
        let mut r1 = RngStream::new(Seed(6), "a");
        let mut r2 = RngStream::new(Seed(7), "b");
        let a = simulate(&img, &deterministic, &mut r1).unwrap();
        let b = simulate(&img, &deterministic, &mut r2).unwrap();
        assert_eq!(a, b);
        let noisy = CamPipeline::new(vec![Stage::Noise { sigma: 0.05 }]).unwrap();
        let mut r3 = RngStream::new(Seed(8), "c");
        let mut r4 = RngStream::new(Seed(8), "c");
        let n1 = simulate(&img, &noisy, &mut r3).unwrap();
        let n2 = simulate(&img, &noisy, &mut r4).unwrap();
        assert_eq!(n1, n2); // same stream, same noise
        let mut r5 = RngStream::new(Seed(9), "d");
        let n3 = simulate(&img, &noisy, &mut r5).unwrap();
        assert_ne!(n1, n3);
    }

    #[test]
    fn invalid_stage_parameters_are_rejected() {
        assert!(CamPipeline::new(vec![Stage::Gamma { gamma: 2.5 }]).is_err());
        assert!(CamPipeline::new(vec![Stage::Scale { factor: 0.0 }]).is_err());
        assert!(CamPipeline::new(vec![Stage::Scale { factor: 1.2 }]).is_err());
        assert!(CamPipeline::new(vec![Stage::BlockDctQuant { quality: 5 }]).is_err());
        assert!(CamPipeline::new(vec![Stage::Noise { sigma: 0.9 }]).is_err());
        assert!(CamPipeline::new(vec![Stage::Perspective { tilt: 0.8 }]).is_err());
        let profile = DistanceProfile {
            entries: vec![("x".into(), 1.5)],
        };
        assert!(profile.validate().is_err());
    }

    #[test]
    fn gamut_clip_full_strength_lands_on_palette() {
        let img = random_image(8, 8, 10);
        let pal = Palette::default_printable();
        let pipe = CamPipeline::new(vec![Stage::GamutClip {
            palette: pal.clone(),
            strength: 1.0,
        }])
        .unwrap();
        let mut rng = RngStream::new(Seed(10), "sim");
        let out = simulate(&img, &pipe, &mut rng).unwrap();
        for y in 0..8 {
            for x in 0..8 {
                let px = out.pixel(y, x);
                assert!(pal
                    .colors()
                    .iter()
                    .any(|t| t.iter().zip(&px).all(|(a, b)| (a - b).abs() < 1e-12)));
            }
        }
    }

    #[test]
    fn zero_tilt_keystone_is_identity() {
        let img = random_image(12, 12, 11);
        let pipe = CamPipeline::new(vec![Stage::Perspective { tilt: 0.0 }]).unwrap();
        let mut rng = RngStream::new(Seed(11), "sim");
        assert_eq!(simulate(&img, &pipe, &mut rng).unwrap(), img);
    }

    #[test]
    fn wallpaper_gain_is_zero_for_self_patch_without_distortion() {
        // A patch cut from a uniform background tiles back to the identical
        // frame, so the identity-pipeline gain is exactly zero.
        let bg = Image::filled(32, 32, 0.4).unwrap();
        let crop = Image::filled(8, 8, 0.4).unwrap();
        let p = Patch::new(crop, PatchMeta::default()).unwrap();
        let metric = ProxyMetric::new();
        let mut rng = RngStream::new(Seed(12), "wall");
        let gain = wallpaper_gain(&bg, &p, &CamPipeline::identity(), &metric, &mut rng).unwrap();
        assert_eq!(gain, 0.0);
    }

    #[test]
    fn distance_curve_has_one_point_per_distance() {
        let bg = mid_image(48, 48, 13);
        let p = random_patch(12, 14);
        let metric = ProxyMetric::new();
        let mut rng = RngStream::new(Seed(15), "curve");
        let curve = wallpaper_distance_curve(
            &bg,
            &p,
            &CamPipeline::identity(),
            &DistanceProfile::default(),
            &metric,
            &mut rng,
        )
        .unwrap();
        assert_eq!(curve.len(), 3);
        assert_eq!(curve[0].0, "near");
        assert!(curve.iter().all(|(_, g)| g.is_finite()));
    }
}
