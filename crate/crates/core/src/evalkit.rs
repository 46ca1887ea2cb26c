//! Metric-gain evaluation: placement protocols, gain statistics with 95%
//! confidence intervals, Lp utilities, synthetic dataset generation, and
//! comparison tables.

use crate::error::{Error, Result};
use crate::imagery::{Image, Patch, PatchMeta, Placement, RngStream, Seed};
use crate::metrics::Metric;
use crate::parallel::{par_map, par_map_range};
use crate::patch_ops::{apply_patch, random_placement, tile_patch, TileSpec};
use serde::{Deserialize, Serialize};

/// Norm order for image differences.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpOrder {
    /// Count of differing samples.
    L0,
    L1,
    /// Euclidean.
    L2,
    /// Max absolute difference.
    LInf,
}

/// Lp distance between two images of equal shape.
pub fn lp_norm(a: &Image, b: &Image, order: LpOrder) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            a.height(),
            a.width(),
            b.height(),
            b.width()
        )));
    }
    let it = a.data().iter().zip(b.data());
    Ok(match order {
        LpOrder::L0 => it.filter(|(x, y)| x != y).count() as f64,
        LpOrder::L1 => it.map(|(x, y)| (x - y).abs()).sum(),
        LpOrder::L2 => it.map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
        LpOrder::LInf => it.map(|(x, y)| (x - y).abs()).fold(0.0, f64::max),
    })
}

/// Score difference `M(attacked) - M(original)`.
pub fn metric_gain(metric: &dyn Metric, original: &Image, attacked: &Image) -> Result<f64> {
    if !original.same_shape(attacked) {
        return Err(Error::ShapeMismatch(format!(
            "original {}x{} vs attacked {}x{}",
            original.height(),
            original.width(),
            attacked.height(),
            attacked.width()
        )));
    }
    Ok(metric.score(attacked)? - metric.score(original)?)
}

/// How the patch is placed during evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolMode {
    /// Fresh random placement per image.
    ImageRandom,
    /// One random placement per video, reused on all its frames.
    VideoFixed,
    /// Full-frame tiling.
    Tiled,
    /// Full-frame tiling against a background; alias of tiled placement with
    /// footprint reporting, matching the camera-facing wallpaper setup.
    Wallpaper,
}

impl ProtocolMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProtocolMode::ImageRandom => "image-random",
            ProtocolMode::VideoFixed => "video-fixed",
            ProtocolMode::Tiled => "tiled",
            ProtocolMode::Wallpaper => "wallpaper",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "image-random" => Ok(ProtocolMode::ImageRandom),
            "video-fixed" => Ok(ProtocolMode::VideoFixed),
            "tiled" => Ok(ProtocolMode::Tiled),
            "wallpaper" => Ok(ProtocolMode::Wallpaper),
            other => Err(Error::InvalidConfig(format!("unknown protocol {other:?}"))),
        }
    }
}

/// Full evaluation protocol: mode, rotation policy, seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalProtocol {
    pub mode: ProtocolMode,
    pub with_rotation: bool,
    pub seed: Seed,
}

impl EvalProtocol {
    pub fn image_random(seed: Seed, with_rotation: bool) -> Self {
        Self {
            mode: ProtocolMode::ImageRandom,
            with_rotation,
            seed,
        }
    }

    pub fn tiled(seed: Seed) -> Self {
        Self {
            mode: ProtocolMode::Tiled,
            with_rotation: false,
            seed,
        }
    }
}

/// Aggregated gains for one (patch, dataset, protocol) run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n-1 denominator; 0 when n = 1).
    pub std: f64,
    /// 95% half-width under the normal approximation: `1.96 * std / sqrt(n)`.
    pub ci95: f64,
    pub protocol: EvalProtocol,
    pub metric_id: String,
    pub patch_meta: PatchMeta,
    /// Fraction of frame pixels covered, reported by the tiled/wallpaper
    /// protocols.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub footprint_fraction: Option<f64>,
    /// Raw per-item gains, in dataset order.
    pub gains: Vec<f64>,
}

impl EvalReport {
    pub fn from_gains(
        gains: Vec<f64>,
        protocol: EvalProtocol,
        metric_id: &str,
        patch_meta: PatchMeta,
        footprint_fraction: Option<f64>,
    ) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let n = gains.len();
        let mean = gains.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (gains.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / (n as f64 - 1.0)).sqrt()
        } else {
            0.0
        };
        let ci95 = 1.96 * std / (n as f64).sqrt();
        Ok(Self {
            n,
            mean,
            std,
            ci95,
            protocol,
            metric_id: metric_id.to_string(),
            patch_meta,
            footprint_fraction,
            gains,
        })
    }
}

/// A video is an ordered frame sequence with a stable name; the name seeds
/// its fixed placement.
#[derive(Clone, Debug)]
pub struct Video {
    pub name: String,
    pub frames: Vec<Image>,
}

/// Evaluates a patch over an image dataset under the protocol's placement
/// policy. Per-item work runs in parallel; gains keep dataset order.
pub fn evaluate_images(
    metric: &dyn Metric,
    images: &[Image],
    patch: &Patch,
    proto: &EvalProtocol,
) -> Result<EvalReport> {
    if images.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let d = patch.size();
    match proto.mode {
        ProtocolMode::ImageRandom => {
            // Placements are drawn sequentially in dataset order so the same
            // seed reproduces them regardless of worker count.
            let mut rng = RngStream::new(proto.seed, "eval/placement");
            let placements: Vec<Placement> = images
                .iter()
                .map(|img| {
                    random_placement(&mut rng, (img.height(), img.width()), d, proto.with_rotation)
                })
                .collect::<Result<_>>()?;
            let gains: Vec<Result<f64>> = par_map_range(images.len(), |i| {
                let attacked = apply_patch(&images[i], patch, &placements[i])?;
                metric_gain(metric, &images[i], &attacked)
            });
            let gains = gains.into_iter().collect::<Result<Vec<f64>>>()?;
            check_gain_bounds(metric, &gains);
            EvalReport::from_gains(
                gains,
                *proto,
                &metric.descriptor().id,
                patch.meta().clone(),
                None,
            )
        }
        ProtocolMode::Tiled | ProtocolMode::Wallpaper => {
            let results: Vec<Result<(f64, f64)>> = par_map(images, |img| {
                let spec = TileSpec::full_frame(img.height(), img.width());
                let attacked = tile_patch(img, patch, &spec)?;
                let frac =
                    spec.footprint_pixels(d) as f64 / (img.height() * img.width()) as f64;
                Ok((metric_gain(metric, img, &attacked)?, frac))
            });
            let mut gains = Vec::with_capacity(images.len());
            let mut frac_sum = 0.0;
            for r in results {
                let (g, f) = r?;
                gains.push(g);
                frac_sum += f;
            }
            let frac = frac_sum / images.len() as f64;
            check_gain_bounds(metric, &gains);
            EvalReport::from_gains(
                gains,
                *proto,
                &metric.descriptor().id,
                patch.meta().clone(),
                Some(frac),
            )
        }
        ProtocolMode::VideoFixed => Err(Error::InvalidConfig(
            "video-fixed protocol needs a video dataset".into(),
        )),
    }
}

/// Evaluates a patch over videos: one placement per video (seeded from the
/// video name), reused on every frame; per-frame gains are averaged within a
/// video first, then across videos.
pub fn evaluate_videos(
    metric: &dyn Metric,
    videos: &[Video],
    patch: &Patch,
    proto: &EvalProtocol,
) -> Result<EvalReport> {
    if videos.is_empty() || videos.iter().any(|v| v.frames.is_empty()) {
        return Err(Error::EmptyDataset);
    }
    if proto.mode != ProtocolMode::VideoFixed {
        return Err(Error::InvalidConfig(format!(
            "video datasets use the video-fixed protocol, got {}",
            proto.mode.as_str()
        )));
    }
    let d = patch.size();
    let placements: Vec<Placement> = videos
        .iter()
        .map(|v| {
            let mut rng = RngStream::new(proto.seed, &format!("eval/video/{}", v.name));
            let f0 = &v.frames[0];
            random_placement(&mut rng, (f0.height(), f0.width()), d, proto.with_rotation)
        })
        .collect::<Result<_>>()?;
    let per_video: Vec<Result<f64>> = par_map_range(videos.len(), |i| {
        let v = &videos[i];
        let pl = &placements[i];
        let mut acc = 0.0;
        for frame in &v.frames {
            let attacked = apply_patch(frame, patch, pl)?;
            acc += metric_gain(metric, frame, &attacked)?;
        }
        Ok(acc / v.frames.len() as f64)
    });
    let gains = per_video.into_iter().collect::<Result<Vec<f64>>>()?;
    check_gain_bounds(metric, &gains);
    EvalReport::from_gains(
        gains,
        *proto,
        &metric.descriptor().id,
        patch.meta().clone(),
        None,
    )
}

fn check_gain_bounds(metric: &dyn Metric, gains: &[f64]) {
    let span = metric.descriptor().m_range();
    debug_assert!(gains.iter().all(|g| g.abs() <= span + 1e-9));
}

/// Procedural image corpus mixing gradients, checkerboards, value noise,
/// flat fields, and blends, with an optional mild noise overlay. Per-image
/// substreams make the output independent of worker count.
pub fn synth_dataset(n: usize, height: usize, width: usize, rng: &RngStream) -> Vec<Image> {
    assert!(n >= 1);
    assert!(height >= 32 && width >= 32);
    par_map_range(n, |i| {
        let mut s = rng.substream(&format!("img/{i}"));
        synth_image(height, width, &mut s)
    })
}

fn synth_image(h: usize, w: usize, rng: &mut RngStream) -> Image {
    let kind = rng.uniform_u64(5);
    let mut img = match kind {
        0 => gradient_image(h, w, rng),
        1 => checker_image(h, w, rng),
        2 => value_noise_image(h, w, rng),
        3 => flat_image(h, w, rng),
        _ => {
            // Blend a gradient with a checkerboard.
            let a = gradient_image(h, w, rng);
            let b = checker_image(h, w, rng);
            let t = rng.range_f64(0.3, 0.7);
            let data = a
                .data()
                .iter()
                .zip(b.data())
                .map(|(x, y)| x * (1.0 - t) + y * t)
                .collect();
            Image::new(h, w, data).expect("blend stays in range")
        }
    };
    if rng.uniform_u64(2) == 1 {
        let amp = rng.range_f64(0.01, 0.05);
        let data = img
            .data()
            .iter()
            .map(|v| (v + rng.range_f64(-amp, amp)).clamp(0.0, 1.0))
            .collect();
        img = Image::new(h, w, data).expect("clamped");
    }
    img
}

fn random_color(rng: &mut RngStream) -> [f64; 3] {
    [
        rng.range_f64(0.05, 0.95),
        rng.range_f64(0.05, 0.95),
        rng.range_f64(0.05, 0.95),
    ]
}

fn gradient_image(h: usize, w: usize, rng: &mut RngStream) -> Image {
    let c1 = random_color(rng);
    let c2 = random_color(rng);
    let theta = rng.range_f64(0.0, std::f64::consts::TAU);
    let (dy, dx) = (theta.sin(), theta.cos());
    let diag = ((h * h + w * w) as f64).sqrt();
    Image::from_fn(h, w, |c, y, x| {
        let t = ((x as f64 * dx + y as f64 * dy) / diag + 1.0) / 2.0;
        (c1[c] + (c2[c] - c1[c]) * t).clamp(0.0, 1.0)
    })
    .expect("gradient in range")
}

fn checker_image(h: usize, w: usize, rng: &mut RngStream) -> Image {
    let c1 = random_color(rng);
    let c2 = random_color(rng);
    let cells = [8usize, 12, 16, 24, 32];
    let cell = cells[rng.uniform_u64(cells.len() as u64) as usize];
    let oy = rng.uniform_u64(cell as u64) as usize;
    let ox = rng.uniform_u64(cell as u64) as usize;
    Image::from_fn(h, w, |c, y, x| {
        let parity = ((y + oy) / cell + (x + ox) / cell) % 2;
        if parity == 0 {
            c1[c]
        } else {
            c2[c]
        }
    })
    .expect("checker in range")
}

fn value_noise_image(h: usize, w: usize, rng: &mut RngStream) -> Image {
    let c1 = random_color(rng);
    let c2 = random_color(rng);
    let step = if rng.uniform_u64(2) == 0 { 8 } else { 16 };
    let gh = h / step + 2;
    let gw = w / step + 2;
    let lattice: Vec<f64> = (0..gh * gw).map(|_| rng.uniform_f64()).collect();
    Image::from_fn(h, w, |c, y, x| {
        let fy = y as f64 / step as f64;
        let fx = x as f64 / step as f64;
        let (iy, ix) = (fy as usize, fx as usize);
        let (ty, tx) = (fy - iy as f64, fx - ix as f64);
        let v00 = lattice[iy * gw + ix];
        let v01 = lattice[iy * gw + ix + 1];
        let v10 = lattice[(iy + 1) * gw + ix];
        let v11 = lattice[(iy + 1) * gw + ix + 1];
        let field = v00 * (1.0 - ty) * (1.0 - tx)
            + v01 * (1.0 - ty) * tx
            + v10 * ty * (1.0 - tx)
            + v11 * ty * tx;
        (c1[c] + (c2[c] - c1[c]) * field).clamp(0.0, 1.0)
    })
    .expect("noise in range")
}

fn flat_image(h: usize, w: usize, rng: &mut RngStream) -> Image {
    let c = random_color(rng);
    Image::from_fn(h, w, |ch, _, _| c[ch]).expect("flat in range")
}

/// One labelled report for the comparison grid.
#[derive(Clone, Debug)]
pub struct ReportEntry {
    pub variant: String,
    pub dataset: String,
    pub report: EvalReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct CellStat {
    pub mean: f64,
    pub ci95: f64,
    pub n: usize,
    /// Rendered as `"{mean:.2} ± {ci95:.2}"`.
    pub text: String,
}

/// Variant-by-dataset grid of `mean ± ci95` cells plus the raw gains.
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonTable {
    pub variants: Vec<String>,
    pub datasets: Vec<String>,
    pub cells: Vec<Vec<Option<CellStat>>>,
    /// Raw per-item gains, `raw_gains[variant_idx][dataset_idx]`.
    pub raw_gains: Vec<Vec<Option<Vec<f64>>>>,
}

/// Builds the comparison grid. Row and column order follow first
/// appearance in `entries`.
pub fn compare_report(entries: &[ReportEntry]) -> Result<ComparisonTable> {
    if entries.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut variants: Vec<String> = Vec::new();
    let mut datasets: Vec<String> = Vec::new();
    for e in entries {
        if !variants.contains(&e.variant) {
            variants.push(e.variant.clone());
        }
        if !datasets.contains(&e.dataset) {
            datasets.push(e.dataset.clone());
        }
    }
    let mut cells: Vec<Vec<Option<CellStat>>> = vec![vec![None; datasets.len()]; variants.len()];
    let mut raw: Vec<Vec<Option<Vec<f64>>>> = vec![vec![None; datasets.len()]; variants.len()];
    for e in entries {
        let vi = variants.iter().position(|v| *v == e.variant).unwrap();
        let di = datasets.iter().position(|d| *d == e.dataset).unwrap();
        cells[vi][di] = Some(CellStat {
            mean: e.report.mean,
            ci95: e.report.ci95,
            n: e.report.n,
            text: format!("{:.2} \u{b1} {:.2}", e.report.mean, e.report.ci95),
        });
        raw[vi][di] = Some(e.report.gains.clone());
    }
    Ok(ComparisonTable {
        variants,
        datasets,
        cells,
        raw_gains: raw,
    })
}

impl ComparisonTable {
    /// CSV rendering: one row per variant, one column per dataset.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("variant");
        for d in &self.datasets {
            out.push(',');
            out.push_str(d);
        }
        out.push('\n');
        for (vi, v) in self.variants.iter().enumerate() {
            out.push_str(v);
            for di in 0..self.datasets.len() {
                out.push(',');
                if let Some(cell) = &self.cells[vi][di] {
                    out.push_str(&cell.text);
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("table serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Result;
    use crate::imagery::{Rotation, CHANNELS};
    use crate::metrics::{MetricDescriptor, MetricEval, ProxyMetric};
    use crate::imagery::Tensor;

    fn random_image(h: usize, w: usize, seed: u64) -> Image {
        let mut rng = RngStream::new(Seed(seed), "ek-img");
        Image::from_fn(h, w, |_, _, _| rng.uniform_f64()).unwrap()
    }

    fn random_patch(d: usize, seed: u64) -> Patch {
        let mut rng = RngStream::new(Seed(seed), "ek-patch");
        let img = Image::from_fn(d, d, |_, _, _| rng.uniform_f64()).unwrap();
        Patch::new(img, PatchMeta::default()).unwrap()
    }

    /// Deterministic stub metric: score = 100 * mean of channel 0.
    struct MeanMetric {
        desc: MetricDescriptor,
    }

    impl MeanMetric {
        fn new() -> Self {
            Self {
                desc: MetricDescriptor::new("mean0", 0.0, 100.0, 1),
            }
        }
    }

    impl Metric for MeanMetric {
        fn descriptor(&self) -> &MetricDescriptor {
            &self.desc
        }

        fn evaluate(&self, img: &Image) -> Result<MetricEval> {
            let hw = (img.height() * img.width()) as f64;
            let score = 100.0 * img.data()[..img.height() * img.width()].iter().sum::<f64>() / hw;
            Ok(MetricEval {
                score,
                gradient: Tensor::zeros(img.height(), img.width()),
            })
        }
    }

    #[test]
    fn lp_norm_trivial_and_oracle() {
        let a = random_image(8, 8, 1);
        assert_eq!(lp_norm(&a, &a, LpOrder::L0).unwrap(), 0.0);
        assert_eq!(lp_norm(&a, &a, LpOrder::L2).unwrap(), 0.0);
        assert_eq!(lp_norm(&a, &a, LpOrder::LInf).unwrap(), 0.0);
        let b = random_image(8, 8, 2);
        // Brute-force per-sample oracle.
        let mut l0 = 0.0;
        let mut l1 = 0.0;
        let mut l2 = 0.0;
        let mut li: f64 = 0.0;
        for (x, y) in a.data().iter().zip(b.data()) {
            let d = (x - y).abs();
            if d != 0.0 {
                l0 += 1.0;
            }
            l1 += d;
            l2 += d * d;
            li = li.max(d);
        }
        assert!((lp_norm(&a, &b, LpOrder::L0).unwrap() - l0).abs() < 1e-12);
        assert!((lp_norm(&a, &b, LpOrder::L1).unwrap() - l1).abs() < 1e-12);
        assert!((lp_norm(&a, &b, LpOrder::L2).unwrap() - l2.sqrt()).abs() < 1e-12);
        assert!((lp_norm(&a, &b, LpOrder::LInf).unwrap() - li).abs() < 1e-12);
        let c = random_image(8, 9, 3);
        assert!(lp_norm(&a, &c, LpOrder::L2).is_err());
    }

    #[test]
    fn patched_image_l0_stays_within_budget() {
        let img = random_image(16, 16, 4);
        let p = random_patch(5, 5);
        let attacked =
            apply_patch(&img, &p, &Placement::new(3, 2, Rotation::R90)).unwrap();
        let l0 = lp_norm(&img, &attacked, LpOrder::L0).unwrap();
        assert!(l0 <= (CHANNELS * 5 * 5) as f64);
    }

    #[test]
    fn gain_of_identical_images_is_zero() {
        let m = ProxyMetric::new();
        let img = random_image(16, 16, 6);
        assert_eq!(metric_gain(&m, &img, &img).unwrap(), 0.0);
        let other = random_image(8, 8, 7);
        assert!(metric_gain(&m, &img, &other).is_err());
    }

    #[test]
    fn gain_matches_direct_score_composition() {
        let m = ProxyMetric::new();
        let img = random_image(16, 16, 8);
        let p = random_patch(6, 9);
        let pl = Placement::new(4, 4, Rotation::R180);
        let attacked = apply_patch(&img, &p, &pl).unwrap();
        let gain = metric_gain(&m, &img, &attacked).unwrap();
        let direct = m.score(&attacked).unwrap() - m.score(&img).unwrap();
        assert_eq!(gain.to_bits(), direct.to_bits());
        assert!(gain.abs() <= m.descriptor().m_range());
    }

    #[test]
    fn report_statistics_on_known_gains() {
        let proto = EvalProtocol::image_random(Seed(0), true);
        let r = EvalReport::from_gains(
            vec![1.0, 2.0, 3.0],
            proto,
            "stub",
            PatchMeta::default(),
            None,
        )
        .unwrap();
        assert!((r.mean - 2.0).abs() < 1e-12);
        assert!((r.std - 1.0).abs() < 1e-12);
        assert!((r.ci95 - 1.96 / 3.0f64.sqrt()).abs() < 1e-12);
        assert!(EvalReport::from_gains(vec![], proto, "stub", PatchMeta::default(), None).is_err());
        // Single gain: zero dispersion by definition.
        let r1 =
            EvalReport::from_gains(vec![5.0], proto, "stub", PatchMeta::default(), None).unwrap();
        assert_eq!(r1.std, 0.0);
        assert_eq!(r1.ci95, 0.0);
    }

    #[test]
    fn identical_images_under_fixed_stub_give_zero_ci() {
        // Stub metric + identical images: per-item gains coincide.
        let m = MeanMetric::new();
        let img = Image::filled(16, 16, 0.25).unwrap();
        let images = vec![img.clone(), img.clone(), img];
        let p = Patch::new(Image::filled(4, 4, 1.0).unwrap(), PatchMeta::default()).unwrap();
        // Tiled mode uses no randomness, so every gain is identical.
        let proto = EvalProtocol::tiled(Seed(3));
        let rep = evaluate_images(&m, &images, &p, &proto).unwrap();
        assert_eq!(rep.ci95, 0.0);
        assert_eq!(rep.mean, rep.gains[0]);
        assert_eq!(rep.footprint_fraction, Some(1.0));
    }

    #[test]
    fn image_random_is_deterministic_per_seed() {
        let m = ProxyMetric::new();
        let images: Vec<Image> = (0..6).map(|i| random_image(24, 24, 10 + i)).collect();
        let p = random_patch(8, 20);
        let proto = EvalProtocol::image_random(Seed(5), true);
        let a = evaluate_images(&m, &images, &p, &proto).unwrap();
        let b = evaluate_images(&m, &images, &p, &proto).unwrap();
        assert_eq!(a.gains, b.gains);
        let other = evaluate_images(
            &m,
            &images,
            &p,
            &EvalProtocol::image_random(Seed(6), true),
        )
        .unwrap();
        assert_ne!(a.gains, other.gains);
        // Mean of per-item gains equals the report mean.
        let mean = a.gains.iter().sum::<f64>() / a.gains.len() as f64;
        assert!((mean - a.mean).abs() < 1e-12);
    }

    #[test]
    fn video_fixed_reuses_placement_within_a_video() {
        let m = MeanMetric::new();
        // Frames of one video are identical, so identical placements imply
        // identical per-frame gains; the mean over frames equals that gain.
        let frame = random_image(32, 32, 30);
        let videos = vec![
            Video {
                name: "clip-a".into(),
                frames: vec![frame.clone(), frame.clone(), frame.clone()],
            },
            Video {
                name: "clip-b".into(),
                frames: vec![frame.clone(), frame],
            },
        ];
        let p = random_patch(6, 31);
        let proto = EvalProtocol {
            mode: ProtocolMode::VideoFixed,
            with_rotation: true,
            seed: Seed(9),
        };
        let rep = evaluate_videos(&m, &videos, &p, &proto).unwrap();
        assert_eq!(rep.n, 2);
        // Same frames, but (seeded by name) different placements across
        // videos almost surely give different gains under the mean metric.
        assert_ne!(rep.gains[0], rep.gains[1]);
        // Re-running reproduces exactly.
        let rep2 = evaluate_videos(&m, &videos, &p, &proto).unwrap();
        assert_eq!(rep.gains, rep2.gains);
        // Protocol misuse errors.
        assert!(evaluate_videos(&m, &videos, &p, &EvalProtocol::tiled(Seed(0))).is_err());
        let imgs = [random_image(16, 16, 1)];
        assert!(evaluate_images(&m, &imgs, &p, &proto).is_err());
    }

    #[test]
    fn synth_is_deterministic_and_spans_the_range() {
        let rng = RngStream::new(Seed(77), "synth");
        let a = synth_dataset(24, 32, 32, &rng);
        let b = synth_dataset(24, 32, 32, &rng);
        assert_eq!(a.len(), 24);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x, y);
        }
        // Histogram over 50 bins spans at least 80% of [0,1].
        let mut bins = [0usize; 50];
        for img in &a {
            for &v in img.data() {
                bins[((v * 50.0) as usize).min(49)] += 1;
            }
        }
        let nonempty = bins.iter().filter(|&&c| c > 0).count();
        assert!(nonempty >= 40, "only {nonempty} of 50 bins populated");
    }

    #[test]
    fn comparison_table_structure_and_parse_back() {
        let proto = EvalProtocol::image_random(Seed(0), true);
        let mk = |mean_base: f64, var: &str, ds: &str| ReportEntry {
            variant: var.into(),
            dataset: ds.into(),
            report: EvalReport::from_gains(
                vec![mean_base - 1.0, mean_base, mean_base + 1.0],
                proto,
                "proxy",
                PatchMeta::default(),
                None,
            )
            .unwrap(),
        };
        let single = compare_report(&[mk(2.0, "Baseline", "synth")]).unwrap();
        assert_eq!(single.variants.len(), 1);
        assert_eq!(single.datasets.len(), 1);
        assert!(single.cells[0][0].is_some());

        let mut entries = Vec::new();
        let variants = [
            "Baseline",
            "Baseline+TV+NPS",
            "BaselineL",
            "BaselineL+",
            "B-WBaselineL+",
            "B-WBaselineWRL+",
            "BaselineWRL+",
            "BaselineWR",
        ];
        for (i, v) in variants.iter().enumerate() {
            for (j, ds) in ["synth-a", "synth-b"].iter().enumerate() {
                entries.push(mk(i as f64 + j as f64 * 0.25, v, ds));
            }
        }
        let table = compare_report(&entries).unwrap();
        assert_eq!(table.variants, variants);
        assert_eq!(table.datasets.len(), 2);
        let csv = table.to_csv();
        assert_eq!(csv.lines().count(), 9);
        // Cell text parses back to the JSON numbers (2-decimal rendering).
        let json = table.to_json();
        for (vi, _) in variants.iter().enumerate() {
            for dj in 0..2 {
                let cell = &json["cells"][vi][dj];
                let text = cell["text"].as_str().unwrap();
                let (m_str, c_str) = text.split_once(" \u{b1} ").unwrap();
                let m: f64 = m_str.parse().unwrap();
                let c: f64 = c_str.parse().unwrap();
                assert!((m - cell["mean"].as_f64().unwrap()).abs() <= 0.005 + 1e-9);
                assert!((c - cell["ci95"].as_f64().unwrap()).abs() <= 0.005 + 1e-9);
            }
        }
        assert!(compare_report(&[]).is_err());
    }
}
