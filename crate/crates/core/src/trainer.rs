//! The patch optimization loop and the eight named training variants.
//!
//! Each iteration samples a mini-batch with replacement, draws a fresh
//! placement per image (rotation only when the variant uses it), optionally
//! relights the composited images, evaluates the combined objective, and
//! takes a projected descent step on the loss (ascent on the score), clamping
//! the patch to `[0, 1]`. Black-white variants re-project to grayscale after
//! every step. Validation runs on a fixed cadence against frozen placements
//! and the best checkpoint is returned.

use crate::error::{Error, Result};
use crate::evalkit::{evaluate_images, EvalProtocol};
use crate::imagery::{Image, Patch, PatchMeta, Placement, RngStream, Seed};
use crate::metrics::Metric;
use crate::objective::{total_loss, LossWeights, Palette};
use crate::patch_ops::{bw_project, draw_relight_delta, random_placement};

/// Update rule for the patch pixels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerKind {
    /// Sign of the gradient times a cosine-decayed step.
    SignAscent,
    /// Adam-style adaptive moments (beta1 0.9, beta2 0.999, eps 1e-8) under
    /// the same cosine schedule.
    AdamLike,
}

/// One of the eight training variants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariantConfig {
    pub name: &'static str,
    pub use_tv_nps: bool,
    pub use_relight: bool,
    pub use_rotation: bool,
    pub use_bw: bool,
}

impl VariantConfig {
    pub const BASELINE: VariantConfig = VariantConfig {
        name: "Baseline",
        use_tv_nps: false,
        use_relight: false,
        use_rotation: true,
        use_bw: false,
    };
    pub const BASELINE_TV_NPS: VariantConfig = VariantConfig {
        name: "Baseline+TV+NPS",
        use_tv_nps: true,
        use_relight: false,
        use_rotation: true,
        use_bw: false,
    };
    pub const BASELINE_L: VariantConfig = VariantConfig {
        name: "BaselineL",
        use_tv_nps: false,
        use_relight: true,
        use_rotation: true,
        use_bw: false,
    };
    pub const BASELINE_L_PLUS: VariantConfig = VariantConfig {
        name: "BaselineL+",
        use_tv_nps: true,
        use_relight: true,
        use_rotation: true,
        use_bw: false,
    };
    pub const BW_BASELINE_L_PLUS: VariantConfig = VariantConfig {
        name: "B-WBaselineL+",
        use_tv_nps: true,
        use_relight: true,
        use_rotation: true,
        use_bw: true,
    };
    pub const BW_BASELINE_WRL_PLUS: VariantConfig = VariantConfig {
        name: "B-WBaselineWRL+",
        use_tv_nps: true,
        use_relight: true,
        use_rotation: false,
        use_bw: true,
    };
    pub const BASELINE_WRL_PLUS: VariantConfig = VariantConfig {
        name: "BaselineWRL+",
        use_tv_nps: true,
        use_relight: true,
        use_rotation: false,
        use_bw: false,
    };
    pub const BASELINE_WR: VariantConfig = VariantConfig {
        name: "BaselineWR",
        use_tv_nps: false,
        use_relight: false,
        use_rotation: false,
        use_bw: false,
    };

    /// The eight variants in canonical order.
    pub fn all() -> [VariantConfig; 8] {
        [
            Self::BASELINE,
            Self::BASELINE_TV_NPS,
            Self::BASELINE_L,
            Self::BASELINE_L_PLUS,
            Self::BW_BASELINE_L_PLUS,
            Self::BW_BASELINE_WRL_PLUS,
            Self::BASELINE_WRL_PLUS,
            Self::BASELINE_WR,
        ]
    }

    /// Accepts the canonical name or its kebab-case CLI alias.
    pub fn by_name(name: &str) -> Result<VariantConfig> {
        let lowered = name.to_ascii_lowercase();
        Self::all()
            .into_iter()
            .find(|v| v.name.eq_ignore_ascii_case(name) || v.kebab() == lowered)
            .ok_or_else(|| Error::UnknownVariant(name.to_string()))
    }

    /// CLI-friendly identifier, e.g. `bw-baseline-wrl+` for `B-WBaselineWRL+`.
    pub fn kebab(&self) -> String {
        match self.name {
            "Baseline" => "baseline".into(),
            "Baseline+TV+NPS" => "baseline-tv-nps".into(),
            "BaselineL" => "baseline-l".into(),
            "BaselineL+" => "baseline-l+".into(),
            "B-WBaselineL+" => "bw-baseline-l+".into(),
            "B-WBaselineWRL+" => "bw-baseline-wrl+".into(),
            "BaselineWRL+" => "baseline-wrl+".into(),
            "BaselineWR" => "baseline-wr".into(),
            other => other.to_ascii_lowercase(),
        }
    }
}

/// Hyperparameters shared by all variants.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub patch_size: usize,
    pub batch_size: usize,
    pub iterations: u64,
    /// Base step size; decays to zero on a cosine schedule.
    pub step: f64,
    pub optimizer: OptimizerKind,
    pub seed: Seed,
    pub weights: LossWeights,
    pub relight_max_delta: f64,
    pub validation_cadence: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            patch_size: 100,
            batch_size: 16,
            iterations: 2000,
            step: 1.0 / 255.0,
            optimizer: OptimizerKind::SignAscent,
            seed: Seed(0),
            weights: LossWeights::default(),
            relight_max_delta: 0.2,
            validation_cadence: 50,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.patch_size < 2 {
            return Err(Error::InvalidConfig("patch_size must be >= 2".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be >= 1".into()));
        }
        if self.step <= 0.0 || !self.step.is_finite() {
            return Err(Error::InvalidConfig("step must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.relight_max_delta) {
            return Err(Error::InvalidRelight(self.relight_max_delta));
        }
        if self.validation_cadence == 0 {
            return Err(Error::InvalidConfig(
                "validation_cadence must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Loss terms recorded at one iteration.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct IterStats {
    pub iter: u64,
    pub attack: f64,
    pub tv: f64,
    pub nps: f64,
    pub total: f64,
}

/// One validation measurement.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct ValPoint {
    pub iter: u64,
    pub mean_gain: f64,
}

/// Per-run record: loss curve, validation curve, best checkpoint.
#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct TrainLog {
    pub iters: Vec<IterStats>,
    pub validations: Vec<ValPoint>,
    pub best_iter: u64,
    pub best_gain: f64,
}

impl TrainLog {
    /// CSV with columns `iter,attack,tv,nps,total,val_gain`; the last column
    /// is filled only on validation rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,attack,tv,nps,total,val_gain\n");
        let mut vals: std::collections::BTreeMap<u64, f64> = std::collections::BTreeMap::new();
        for v in &self.validations {
            vals.insert(v.iter, v.mean_gain);
        }
        if let Some(g) = vals.get(&0) {
            out.push_str(&format!("0,,,,,{g}\n"));
        }
        for s in &self.iters {
            let val = vals
                .get(&s.iter)
                .map(|g| g.to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                s.iter, s.attack, s.tv, s.nps, s.total, val
            ));
        }
        out
    }
}

/// Fresh patch with i.i.d. uniform `[0.25, 0.75]` pixels; mid-range values
/// avoid immediate clamp saturation. Samples are drawn in `(c, y, x)` order.
pub fn init_patch(d: usize, rng: &mut RngStream) -> Result<Patch> {
    if d < 2 {
        return Err(Error::InvalidPatch(format!("side must be >= 2, got {d}")));
    }
    let img = Image::from_fn(d, d, |_, _, _| rng.range_f64(0.25, 0.75))?;
    Patch::new(
        img,
        PatchMeta {
            variant: "init".into(),
            ..Default::default()
        },
    )
}

struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

/// Runs the optimization loop for one variant and returns the
/// best-validation checkpoint with its log.
///
/// Random draws come from four labelled streams of `tc.seed` — `train/init`,
/// `train/batch`, `train/placement`, `train/relight` — so identical
/// `(seed, config, dataset)` runs are bit-identical, and variants sharing a
/// seed share their initial patch.
pub fn train(
    train_set: &[Image],
    val_set: &[Image],
    metric: &dyn Metric,
    vc: &VariantConfig,
    tc: &TrainConfig,
    palette: &Palette,
) -> Result<(Patch, TrainLog)> {
    tc.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if train_set.len() < tc.batch_size {
        return Err(Error::InvalidConfig(format!(
            "dataset of {} images is smaller than batch size {}",
            train_set.len(),
            tc.batch_size
        )));
    }
    let d = tc.patch_size;
    for img in train_set.iter().chain(val_set) {
        if img.height() < d || img.width() < d {
            return Err(Error::PatchTooLarge {
                d,
                height: img.height(),
                width: img.width(),
            });
        }
        if img.height() < metric.descriptor().min_side || img.width() < metric.descriptor().min_side
        {
            return Err(Error::ImageTooSmall {
                height: img.height(),
                width: img.width(),
                min_side: metric.descriptor().min_side,
            });
        }
    }

    let mut init_rng = RngStream::new(tc.seed, "train/init");
    let mut batch_rng = RngStream::new(tc.seed, "train/batch");
    let mut placement_rng = RngStream::new(tc.seed, "train/placement");
    let mut relight_rng = RngStream::new(tc.seed, "train/relight");

    let meta = PatchMeta {
        variant: vc.name.to_string(),
        seed: tc.seed.0,
        iterations: 0,
        metric: metric.descriptor().id.clone(),
        ..Default::default()
    };
    let mut patch = init_patch(d, &mut init_rng)?.with_meta(meta.clone());
    if vc.use_bw {
        patch = bw_project(&patch);
    }

    if tc.iterations == 0 {
        return Ok((patch, TrainLog::default()));
    }

    let weights = if vc.use_tv_nps {
        tc.weights
    } else {
        LossWeights::zero()
    };
    let m_range = metric.descriptor().m_range();
    // Validation always sees the same placements: the protocol seed is fixed
    // and `evaluate_images` derives its streams from it on every call.
    let val_proto = EvalProtocol::image_random(tc.seed, vc.use_rotation);
    let validate = |p: &Patch| -> Result<f64> {
        Ok(evaluate_images(metric, val_set, p, &val_proto)?.mean)
    };

    let mut log = TrainLog::default();
    let gain0 = validate(&patch)?;
    log.validations.push(ValPoint {
        iter: 0,
        mean_gain: gain0,
    });
    let mut best_gain = gain0;
    let mut best_iter = 0u64;
    let mut best_pixels = patch.clone();

    let mut adam = AdamState {
        m: vec![0.0; 3 * d * d],
        v: vec![0.0; 3 * d * d],
        t: 0,
    };

    let total_iters = tc.iterations;
    for t in 1..=total_iters {
        // Mini-batch with replacement; draws happen before the parallel
        // section so worker count cannot affect the stream.
        let batch: Vec<&Image> = (0..tc.batch_size)
            .map(|_| &train_set[batch_rng.uniform_u64(train_set.len() as u64) as usize])
            .collect();
        let placements: Vec<Placement> = batch
            .iter()
            .map(|img| {
                random_placement(
                    &mut placement_rng,
                    (img.height(), img.width()),
                    d,
                    vc.use_rotation,
                )
            })
            .collect::<Result<_>>()?;
        let deltas: Option<Vec<f64>> = if vc.use_relight {
            Some(
                (0..batch.len())
                    .map(|_| draw_relight_delta(&mut relight_rng, tc.relight_max_delta))
                    .collect::<Result<_>>()?,
            )
        } else {
            None
        };

        let breakdown = total_loss(
            &batch,
            &patch,
            &placements,
            metric,
            &weights,
            palette,
            m_range,
            deltas.as_deref(),
        )?;

        // Cosine-decayed step: full size at t=1, approaching zero at the end.
        let step_t =
            tc.step * 0.5 * (1.0 + (std::f64::consts::PI * (t - 1) as f64 / total_iters as f64).cos());
        let grad = breakdown.grad_patch.data();
        let mut pixels = patch.pixels().data().to_vec();
        match tc.optimizer {
            OptimizerKind::SignAscent => {
                for (p, g) in pixels.iter_mut().zip(grad) {
                    let dir = if *g > 0.0 {
                        1.0
                    } else if *g < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                    *p = (*p - step_t * dir).clamp(0.0, 1.0);
                }
            }
            OptimizerKind::AdamLike => {
                adam.t += 1;
                let b1: f64 = 0.9;
                let b2: f64 = 0.999;
                let bc1 = 1.0 - b1.powi(adam.t as i32);
                let bc2 = 1.0 - b2.powi(adam.t as i32);
                for i in 0..pixels.len() {
                    adam.m[i] = b1 * adam.m[i] + (1.0 - b1) * grad[i];
                    adam.v[i] = b2 * adam.v[i] + (1.0 - b2) * grad[i] * grad[i];
                    let mhat = adam.m[i] / bc1;
                    let vhat = adam.v[i] / bc2;
                    pixels[i] = (pixels[i] - step_t * mhat / (vhat.sqrt() + 1e-8)).clamp(0.0, 1.0);
                }
            }
        }
        patch = patch.with_pixels(Image::new(d, d, pixels)?);
        if vc.use_bw {
            patch = bw_project(&patch);
        }

        log.iters.push(IterStats {
            iter: t,
            attack: breakdown.attack,
            tv: breakdown.tv,
            nps: breakdown.nps,
            total: breakdown.total,
        });

        if t % tc.validation_cadence == 0 || t == total_iters {
            let gain = validate(&patch)?;
            log.validations.push(ValPoint {
                iter: t,
                mean_gain: gain,
            });
            if gain > best_gain {
                best_gain = gain;
                best_iter = t;
                best_pixels = patch.clone();
            }
        }
    }

    log.best_iter = best_iter;
    log.best_gain = best_gain;
    let mut final_meta = meta;
    final_meta.iterations = best_iter;
    Ok((best_pixels.with_meta(final_meta), log))
}

/// Trains all eight variants with a shared seed and evaluates each on the
/// held-out set under its own placement policy.
pub fn train_all_variants(
    train_set: &[Image],
    val_set: &[Image],
    test_set: &[Image],
    metric: &dyn Metric,
    tc: &TrainConfig,
    palette: &Palette,
    test_name: &str,
) -> Result<TrainAllOutcome> {
    let mut patches = Vec::with_capacity(8);
    let mut entries = Vec::with_capacity(8);
    for vc in VariantConfig::all() {
        let (patch, log) = train(train_set, val_set, metric, &vc, tc, palette)?;
        let proto = EvalProtocol::image_random(tc.seed, vc.use_rotation);
        let report = evaluate_images(metric, test_set, &patch, &proto)?;
        entries.push(crate::evalkit::ReportEntry {
            variant: vc.name.to_string(),
            dataset: test_name.to_string(),
            report,
        });
        patches.push((vc, patch, log));
    }
    let table = crate::evalkit::compare_report(&entries)?;
    Ok(TrainAllOutcome { patches, table })
}

/// Everything `train_all_variants` produces.
pub struct TrainAllOutcome {
    pub patches: Vec<(VariantConfig, Patch, TrainLog)>,
    pub table: crate::evalkit::ComparisonTable,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalkit::synth_dataset;
    use crate::imagery::{save_patch, Rotation};
    use crate::metrics::ProxyMetric;
    use crate::objective::Palette;
    use tempfile::tempdir;

    fn toy_setup() -> (Vec<Image>, Vec<Image>, ProxyMetric, Palette) {
        let rng = RngStream::new(Seed(1000), "toy-train");
        let train = synth_dataset(8, 64, 64, &rng);
        let val_rng = RngStream::new(Seed(2000), "toy-val");
        let val = synth_dataset(6, 64, 64, &val_rng);
        (train, val, ProxyMetric::new(), Palette::default_printable())
    }

    fn toy_config(iterations: u64) -> TrainConfig {
        TrainConfig {
            patch_size: 16,
            batch_size: 4,
            iterations,
            validation_cadence: 25,
            seed: Seed(7),
            ..Default::default()
        }
    }

    #[test]
    fn variant_table_matches_the_eight_named_setups() {
        let all = VariantConfig::all();
        assert_eq!(all.len(), 8);
        let expect = [
            ("Baseline", false, false, true, false),
            ("Baseline+TV+NPS", true, false, true, false),
            ("BaselineL", false, true, true, false),
            ("BaselineL+", true, true, true, false),
            ("B-WBaselineL+", true, true, true, true),
            ("B-WBaselineWRL+", true, true, false, true),
            ("BaselineWRL+", true, true, false, false),
            ("BaselineWR", false, false, false, false),
        ];
        for (vc, (name, tvnps, light, rot, bw)) in all.iter().zip(expect) {
            assert_eq!(vc.name, name);
            assert_eq!(vc.use_tv_nps, tvnps, "{name} tv/nps");
            assert_eq!(vc.use_relight, light, "{name} relight");
            assert_eq!(vc.use_rotation, rot, "{name} rotation");
            assert_eq!(vc.use_bw, bw, "{name} bw");
        }
        assert_eq!(
            VariantConfig::by_name("baseline-wrl+").unwrap().name,
            "BaselineWRL+"
        );
        assert_eq!(
            VariantConfig::by_name("B-WBaselineL+").unwrap().name,
            "B-WBaselineL+"
        );
        assert!(VariantConfig::by_name("nope").is_err());
    }

    #[test]
    fn init_patch_is_mid_range_and_seeded() {
        let mut a = RngStream::new(Seed(3), "init");
        let mut b = RngStream::new(Seed(3), "init");
        let pa = init_patch(12, &mut a).unwrap();
        let pb = init_patch(12, &mut b).unwrap();
        assert_eq!(pa.pixels(), pb.pixels());
        assert!(pa
            .pixels()
            .data()
            .iter()
            .all(|&v| (0.25..=0.75).contains(&v)));
        let mut c = RngStream::new(Seed(4), "init");
        let pc = init_patch(12, &mut c).unwrap();
        let differing = pa
            .pixels()
            .data()
            .iter()
            .zip(pc.pixels().data())
            .filter(|(x, y)| x != y)
            .count();
        assert!(differing * 10 > pa.pixels().len() * 9, "only {differing} differ");
        assert!(init_patch(1, &mut c).is_err());
    }

    #[test]
    fn zero_iterations_returns_the_init_patch() {
        let (train_set, val, metric, pal) = toy_setup();
        let tc = toy_config(0);
        let (patch, log) = train(
            &train_set,
            &val,
            &metric,
            &VariantConfig::BASELINE,
            &tc,
            &pal,
        )
        .unwrap();
        assert!(log.iters.is_empty());
        assert!(log.validations.is_empty());
        let mut rng = RngStream::new(tc.seed, "train/init");
        let expected = init_patch(16, &mut rng).unwrap();
        assert_eq!(patch.pixels(), expected.pixels());
        assert_eq!(patch.meta().variant, "Baseline");
        assert_eq!(patch.meta().iterations, 0);
    }

    #[test]
    fn training_improves_validation_gain() {
        let (train_set, val, metric, pal) = toy_setup();
        let tc = toy_config(200);
        let (patch, log) = train(
            &train_set,
            &val,
            &metric,
            &VariantConfig::BASELINE,
            &tc,
            &pal,
        )
        .unwrap();
        let initial = log.validations.first().unwrap().mean_gain;
        let last = log.validations.last().unwrap().mean_gain;
        assert!(
            last > initial,
            "final gain {last} not above initial {initial}"
        );
        assert!(log.best_gain >= initial);
        assert_eq!(log.iters.len(), 200);
        // Patch stays in range and carries provenance.
        assert!(patch.pixels().data().iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert_eq!(patch.meta().seed, 7);
        assert_eq!(patch.meta().metric, "proxy");
        assert_eq!(patch.meta().iterations, log.best_iter);
    }

    #[test]
    fn bw_variant_keeps_channels_equal() {
        let (train_set, val, metric, pal) = toy_setup();
        let tc = toy_config(30);
        let (patch, _) = train(
            &train_set,
            &val,
            &metric,
            &VariantConfig::BW_BASELINE_L_PLUS,
            &tc,
            &pal,
        )
        .unwrap();
        let img = patch.pixels();
        let d = patch.size();
        for y in 0..d {
            for x in 0..d {
                let px = img.pixel(y, x);
                assert_eq!(px[0], px[1]);
                assert_eq!(px[1], px[2]);
            }
        }
    }

    #[test]
    fn first_update_follows_the_plain_attack_gradient() {
        // With regularizers off, one training step must equal a manual sign
        // step on the objective gradient computed with replayed draws.
        let (train_set, val, metric, pal) = toy_setup();
        let mut tc = toy_config(1);
        tc.validation_cadence = 1;
        let vc = VariantConfig::BASELINE;
        let (got, _) = train(&train_set, &val, &metric, &vc, &tc, &pal).unwrap();

        let mut init_rng = RngStream::new(tc.seed, "train/init");
        let mut batch_rng = RngStream::new(tc.seed, "train/batch");
        let mut placement_rng = RngStream::new(tc.seed, "train/placement");
        let patch0 = init_patch(tc.patch_size, &mut init_rng).unwrap();
        let batch: Vec<&Image> = (0..tc.batch_size)
            .map(|_| &train_set[batch_rng.uniform_u64(train_set.len() as u64) as usize])
            .collect();
        let placements: Vec<Placement> = batch
            .iter()
            .map(|img| {
                random_placement(
                    &mut placement_rng,
                    (img.height(), img.width()),
                    tc.patch_size,
                    true,
                )
                .unwrap()
            })
            .collect();
        let breakdown = total_loss(
            &batch,
            &patch0,
            &placements,
            &metric,
            &LossWeights::zero(),
            &pal,
            100.0,
            None,
        )
        .unwrap();
        let expected: Vec<f64> = patch0
            .pixels()
            .data()
            .iter()
            .zip(breakdown.grad_patch.data())
            .map(|(p, g)| {
                let dir = if *g > 0.0 { 1.0 } else if *g < 0.0 { -1.0 } else { 0.0 };
                (p - tc.step * dir).clamp(0.0, 1.0)
            })
            .collect();
        assert_eq!(got.pixels().data(), &expected[..]);
    }

    #[test]
    fn equal_seeds_give_byte_identical_patch_files() {
        let (train_set, val, metric, pal) = toy_setup();
        let tc = toy_config(40);
        let dir = tempdir().unwrap();
        let mut paths = Vec::new();
        for run in 0..2 {
            let (patch, _) = train(
                &train_set,
                &val,
                &metric,
                &VariantConfig::BASELINE_L_PLUS,
                &tc,
                &pal,
            )
            .unwrap();
            let path = dir.path().join(format!("run{run}.tipf"));
            save_patch(&patch, &path).unwrap();
            paths.push(path);
        }
        let a = std::fs::read(&paths[0]).unwrap();
        let b = std::fs::read(&paths[1]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_setups() {
        let (train_set, val, metric, pal) = toy_setup();
        let mut tc = toy_config(5);
        tc.batch_size = 100; // larger than the dataset
        assert!(train(&train_set, &val, &metric, &VariantConfig::BASELINE, &tc, &pal).is_err());
        let tc = toy_config(5);
        assert!(train(&[], &val, &metric, &VariantConfig::BASELINE, &tc, &pal).is_err());
        let mut tc2 = toy_config(5);
        tc2.patch_size = 128; // larger than the 64x64 images
        assert!(train(&train_set, &val, &metric, &VariantConfig::BASELINE, &tc2, &pal).is_err());
    }

    #[test]
    fn shared_seed_shares_the_initial_patch_across_variants() {
        let (train_set, val, metric, pal) = toy_setup();
        let tc = toy_config(0);
        let (a, _) = train(&train_set, &val, &metric, &VariantConfig::BASELINE, &tc, &pal).unwrap();
        let (b, _) =
            train(&train_set, &val, &metric, &VariantConfig::BASELINE_WR, &tc, &pal).unwrap();
        assert_eq!(a.pixels(), b.pixels());
    }

    #[test]
    fn adam_optimizer_also_improves() {
        let (train_set, val, metric, pal) = toy_setup();
        let mut tc = toy_config(100);
        tc.optimizer = OptimizerKind::AdamLike;
        tc.step = 0.02;
        let (_, log) = train(
            &train_set,
            &val,
            &metric,
            &VariantConfig::BASELINE_WR,
            &tc,
            &pal,
        )
        .unwrap();
        let initial = log.validations.first().unwrap().mean_gain;
        assert!(log.best_gain > initial);
    }

    #[test]
    fn log_csv_has_header_and_val_column() {
        let (train_set, val, metric, pal) = toy_setup();
        let mut tc = toy_config(10);
        tc.validation_cadence = 5;
        let (_, log) = train(&train_set, &val, &metric, &VariantConfig::BASELINE, &tc, &pal)
            .unwrap();
        let csv = log.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "iter,attack,tv,nps,total,val_gain");
        // Row 0 is the init validation, then one row per iteration.
        assert_eq!(csv.lines().count(), 1 + 1 + 10);
        let row5 = csv.lines().nth(2 + 4).unwrap();
        assert!(!row5.ends_with(','), "iteration 5 should carry a val gain: {row5}");
    }

    #[test]
    fn rotation_choice_respected_in_training_draws() {
        // A no-rotation variant consumes two draws per placement, a rotation
        // variant three; both must stay reproducible.
        let (train_set, val, metric, pal) = toy_setup();
        let tc = toy_config(3);
        for vc in [VariantConfig::BASELINE, VariantConfig::BASELINE_WR] {
            let (a, _) = train(&train_set, &val, &metric, &vc, &tc, &pal).unwrap();
            let (b, _) = train(&train_set, &val, &metric, &vc, &tc, &pal).unwrap();
            assert_eq!(a.pixels(), b.pixels());
        }
        let _ = Rotation::R0;
    }
}
