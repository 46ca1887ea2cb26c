//! Run configuration: a strict JSON document with optional sections, merged
//! with command-line flags (flags win) over built-in defaults. The effective
//! configuration is echoed into every output and hashed into artifacts.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use tipatch_core::camsim::{CamPipeline, Stage};
use tipatch_core::imagery::Seed;
use tipatch_core::objective::{LossWeights, Palette};
use tipatch_core::trainer::{OptimizerKind, TrainConfig};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub metric: MetricSection,
    pub train: TrainSection,
    pub losses: LossSection,
    pub camsim: CamsimSection,
    pub eval: EvalSection,
    pub io: IoSection,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricSection {
    pub id: String,
    pub weights: Option<PathBuf>,
}

impl Default for MetricSection {
    fn default() -> Self {
        Self {
            id: "proxy".into(),
            weights: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub variant: String,
    pub patch_size: usize,
    pub batch_size: usize,
    pub iterations: u64,
    pub step: f64,
    pub optimizer: String,
    pub seed: u64,
    pub relight_max_delta: f64,
    pub validation_cadence: u64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let tc = TrainConfig::default();
        Self {
            variant: "baseline".into(),
            patch_size: tc.patch_size,
            batch_size: tc.batch_size,
            iterations: tc.iterations,
            step: tc.step,
            optimizer: "sign-ascent".into(),
            seed: 0,
            relight_max_delta: tc.relight_max_delta,
            validation_cadence: tc.validation_cadence,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossSection {
    pub lambda_tv: f64,
    pub lambda_nps: f64,
    pub palette_path: Option<PathBuf>,
}

impl Default for LossSection {
    fn default() -> Self {
        let w = LossWeights::default();
        Self {
            lambda_tv: w.lambda_tv,
            lambda_nps: w.lambda_nps,
            palette_path: None,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CamsimSection {
    pub stages: Vec<serde_json::Value>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    pub protocol: String,
    /// Rotation policy; `null` lets the patch's training variant decide.
    pub with_rotation: Option<bool>,
    pub seed: u64,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            protocol: "image-random".into(),
            with_rotation: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IoSection {
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                let cfg: RunConfig = serde_json::from_str(&text)
                    .with_context(|| format!("parsing config {}", p.display()))?;
                Ok(cfg)
            }
        }
    }

    /// SHA-256 of the canonical JSON rendering.
    pub fn sha256(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(json.as_bytes());
        hex_string(&h.finalize())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let optimizer = match self.train.optimizer.as_str() {
            "sign-ascent" => OptimizerKind::SignAscent,
            "adam-like" => OptimizerKind::AdamLike,
            other => bail!("unknown optimizer {other:?} (sign-ascent | adam-like)"),
        };
        Ok(TrainConfig {
            patch_size: self.train.patch_size,
            batch_size: self.train.batch_size,
            iterations: self.train.iterations,
            step: self.train.step,
            optimizer,
            seed: Seed(self.train.seed),
            weights: LossWeights::new(self.losses.lambda_tv, self.losses.lambda_nps)?,
            relight_max_delta: self.train.relight_max_delta,
            validation_cadence: self.train.validation_cadence,
        })
    }

    pub fn palette(&self) -> Result<Palette> {
        match &self.losses.palette_path {
            None => Ok(Palette::default_printable()),
            Some(p) => Ok(Palette::load(p)?),
        }
    }

    pub fn pipeline(&self) -> Result<CamPipeline> {
        let stages = self
            .camsim
            .stages
            .iter()
            .map(stage_from_value)
            .collect::<Result<Vec<Stage>>>()?;
        Ok(CamPipeline::new(stages)?)
    }
}

/// Strict stage parsing: every key is checked against the stage kind before
/// the values are read.
fn stage_from_value(v: &serde_json::Value) -> Result<Stage> {
    let obj = v
        .as_object()
        .context("camsim stage must be a JSON object")?;
    let kind = obj
        .get("kind")
        .and_then(|k| k.as_str())
        .context("camsim stage needs a \"kind\" string")?;
    let allowed: &[&str] = match kind {
        "scale" => &["kind", "factor"],
        "brightness" => &["kind", "delta"],
        "gamma" => &["kind", "gamma"],
        "gamut_clip" => &["kind", "strength", "palette_path"],
        "blur" => &["kind", "passes"],
        "noise" => &["kind", "sigma"],
        "block_dct_quant" => &["kind", "quality"],
        "perspective" => &["kind", "tilt"],
        other => bail!("unknown camsim stage kind {other:?}"),
    };
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            bail!("unknown key {key:?} in camsim stage {kind:?}");
        }
    }
    let f = |key: &str| -> Result<f64> {
        obj.get(key)
            .and_then(|x| x.as_f64())
            .with_context(|| format!("stage {kind:?} needs numeric {key:?}"))
    };
    let stage = match kind {
        "scale" => Stage::Scale { factor: f("factor")? },
        "brightness" => Stage::Brightness { delta: f("delta")? },
        "gamma" => Stage::Gamma { gamma: f("gamma")? },
        "gamut_clip" => {
            let palette = match obj.get("palette_path").and_then(|p| p.as_str()) {
                Some(p) => Palette::load(p)?,
                None => Palette::default_printable(),
            };
            Stage::GamutClip {
                palette,
                strength: f("strength")?,
            }
        }
        "blur" => Stage::Blur {
            passes: f("passes")? as u32,
        },
        "noise" => Stage::Noise { sigma: f("sigma")? },
        "block_dct_quant" => Stage::BlockDctQuant {
            quality: f("quality")? as u32,
        },
        "perspective" => Stage::Perspective { tilt: f("tilt")? },
        _ => unreachable!(),
    };
    stage.validate()?;
    Ok(stage)
}

pub fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
