//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed header at byte {offset}: {reason}")]
    MalformedHeader {
        path: PathBuf,
        offset: usize,
        reason: String,
    },

    #[error("{path}: not an 8-bit RGB image: {detail}")]
    NonRgb { path: PathBuf, detail: String },

    #[error("{path}: truncated payload at byte {offset}: need {expected} more bytes")]
    Truncated {
        path: PathBuf,
        offset: usize,
        expected: usize,
    },

    #[error("{path}: bad magic {found:?}, expected {expected:?}")]
    BadMagic {
        path: PathBuf,
        found: String,
        expected: String,
    },

    #[error("{path}: dimension mismatch: {detail}")]
    DimensionMismatch { path: PathBuf, detail: String },

    #[error("{path}: payload contains non-finite values")]
    NonFinitePayload { path: PathBuf },

    #[error("invalid image shape: {0}")]
    InvalidImage(String),

    #[error("invalid patch: {0}")]
    InvalidPatch(String),

    #[error("placement ({x},{y}) rot {rot} out of bounds for {d}x{d} patch in {width}x{height} image")]
    PlacementOutOfBounds {
        x: usize,
        y: usize,
        rot: u32,
        d: usize,
        height: usize,
        width: usize,
    },

    #[error("rotation must be one of 0/90/180/270 degrees, got {0}")]
    InvalidRotation(u32),

    #[error("patch side {d} exceeds image dimensions {height}x{width}")]
    PatchTooLarge {
        d: usize,
        height: usize,
        width: usize,
    },

    #[error("invalid tile region: {0}")]
    InvalidRegion(String),

    #[error("image {height}x{width} below metric minimum side {min_side}")]
    ImageTooSmall {
        height: usize,
        width: usize,
        min_side: usize,
    },

    #[error("metric range must be positive, got {0}")]
    NonPositiveRange(f64),

    #[error("invalid palette: {0}")]
    InvalidPalette(String),

    #[error("invalid loss weights: {0}")]
    InvalidWeights(String),

    #[error("batch is empty")]
    EmptyBatch,

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("batch arity mismatch: {0}")]
    BatchMismatch(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid training config: {0}")]
    InvalidConfig(String),

    #[error("unknown variant {0:?}")]
    UnknownVariant(String),

    #[error("unknown metric {0:?}")]
    UnknownMetric(String),

    #[error("invalid pipeline stage: {0}")]
    InvalidStageParam(String),

    #[error("invalid relight amplitude {0}: must satisfy 0 <= max_delta < 1")]
    InvalidRelight(f64),
}
