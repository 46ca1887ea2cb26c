//! Adversarial patch toolkit for differentiable no-reference image quality
//! metrics.
//!
//! The crate trains square pixel patches that inflate the score of a
//! differentiable quality metric when composited anywhere into an image,
//! supports the physical-transfer training variants (total-variation and
//! non-printability regularizers, relighting, black-white projection,
//! rotation-free training), tiles patches over arbitrary regions up to
//! full-frame "wallpaper" coverage, simulates print-and-capture distortions,
//! and evaluates the resulting metric gain with confidence intervals.
//!
//! Module map:
//! - [`imagery`] — image/patch value types, PPM/PNG and patch-file codecs,
//!   deterministic seeded RNG streams.
//! - [`metrics`] — the pluggable metric interface, two built-in reference
//!   metrics, and a finite-difference gradient checker.
//! - [`patch_ops`] — patch application, rotation, tiling, relighting,
//!   black-white projection.
//! - [`objective`] — attack loss, TV and NPS regularizers, combined training
//!   objective with analytic patch gradients.
//! - [`trainer`] — the optimization loop and the eight named training
//!   variants.
//! - [`camsim`] — parametric camera/capture distortion pipeline and the
//!   wallpaper protocol.
//! - [`evalkit`] — evaluation protocols, gain statistics, Lp utilities,
//!   synthetic datasets, comparison reports.
//!
//! With the default `parallel` feature, batch loops run on rayon; reductions
//! are always performed in input order, so outputs are bit-identical to the
//! sequential build.

pub mod camsim;
pub mod error;
pub mod evalkit;
pub mod imagery;
pub mod metrics;
pub mod objective;
pub(crate) mod parallel;
pub mod patch_ops;
pub mod trainer;

pub use error::{Error, Result};
pub use parallel::configure_threads;
