//! Image and patch value types, file codecs, and deterministic randomness.
//!
//! Images are planar RGB float tensors (channel-major, row-major within a
//! channel) with every sample in `[0, 1]`. Patches are square images plus
//! training provenance. Both are immutable after construction and safe to
//! share across workers.

mod ppm;
mod rng;
mod tipf;

pub use ppm::{load_image, save_image};
pub use rng::RngStream;
pub use tipf::{encode_patch, load_patch, save_patch, SectionFile, TIPF_MAGIC, TIPF_VERSION};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Channel count; the toolkit is RGB-only.
pub const CHANNELS: usize = 3;

/// Maps an 8-bit sample to float exactly.
#[inline]
pub fn dequantize8(b: u8) -> f64 {
    f64::from(b) / 255.0
}

/// Maps a float in `[0,1]` to 8 bits, rounding half up.
#[inline]
pub fn quantize8(f: f64) -> u8 {
    (f * 255.0).round().clamp(0.0, 255.0) as u8
}

/// Planar RGB image, channel-major `[c][y][x]`, samples in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Image {
    /// Builds an image from raw planar data, validating shape and range.
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be positive, got {height}x{width}"
            )));
        }
        let expected = CHANNELS * height * width;
        if data.len() != expected {
            return Err(Error::InvalidImage(format!(
                "data length {} does not match 3*{height}*{width} = {expected}",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidImage(format!(
                "sample {v} outside [0, 1]"
            )));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    /// Constant-valued image.
    pub fn filled(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(height, width, vec![value; CHANNELS * height * width])
    }

    /// Builds per sample from `(channel, y, x)`. Values are validated.
    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(CHANNELS * height * width);
        for c in 0..CHANNELS {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(c, y, x));
                }
            }
        }
        Self::new(height, width, data)
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    /// Total sample count, `3 * height * width`.
    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn idx(&self, c: usize, y: usize, x: usize) -> usize {
        (c * self.height + y) * self.width + x
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[self.idx(c, y, x)]
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// In-crate mutable access. Callers are responsible for keeping samples
    /// in `[0, 1]`.
    #[inline]
    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// RGB triple at a pixel.
    #[inline]
    pub fn pixel(&self, y: usize, x: usize) -> [f64; 3] {
        [self.get(0, y, x), self.get(1, y, x), self.get(2, y, x)]
    }

    /// Same dimensions as another image.
    pub fn same_shape(&self, other: &Image) -> bool {
        self.height == other.height && self.width == other.width
    }
}

/// Image-shaped float buffer without the `[0,1]` constraint; used for
/// gradients and intermediate feature maps.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            data: vec![0.0; CHANNELS * height * width],
        }
    }

    pub fn from_data(height: usize, width: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), CHANNELS * height * width);
        Self {
            height,
            width,
            data,
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn idx(&self, c: usize, y: usize, x: usize) -> usize {
        (c * self.height + y) * self.width + x
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[self.idx(c, y, x)]
    }

    #[inline]
    pub fn set(&mut self, c: usize, y: usize, x: usize, v: f64) {
        let i = self.idx(c, y, x);
        self.data[i] = v;
    }

    #[inline]
    pub fn add(&mut self, c: usize, y: usize, x: usize, v: f64) {
        let i = self.idx(c, y, x);
        self.data[i] += v;
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// `self += scale * other`, elementwise.
    pub fn add_scaled(&mut self, other: &Tensor, scale: f64) {
        assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Training provenance carried inside a patch file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct PatchMeta {
    /// Training variant name, e.g. "Baseline" or "BaselineWRL+".
    pub variant: String,
    /// Seed the patch was trained with.
    pub seed: u64,
    /// Iteration index of the checkpoint this patch was taken from.
    pub iterations: u64,
    /// Identifier of the metric the patch was trained against.
    pub metric: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub config_sha256: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tool_version: Option<String>,
}

/// Square adversarial patch: a `3 x D x D` image plus provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct Patch {
    pixels: Image,
    meta: PatchMeta,
}

impl Patch {
    pub fn new(pixels: Image, meta: PatchMeta) -> Result<Self> {
        if pixels.height() != pixels.width() {
            return Err(Error::InvalidPatch(format!(
                "patch must be square, got {}x{}",
                pixels.height(),
                pixels.width()
            )));
        }
        if pixels.height() < 2 {
            return Err(Error::InvalidPatch(format!(
                "patch side must be >= 2, got {}",
                pixels.height()
            )));
        }
        Ok(Self { pixels, meta })
    }

    /// Side length D.
    #[inline]
    pub fn size(&self) -> usize {
        self.pixels.height()
    }

    #[inline]
    pub fn pixels(&self) -> &Image {
        &self.pixels
    }

    #[inline]
    pub fn meta(&self) -> &PatchMeta {
        &self.meta
    }

    pub fn with_meta(self, meta: PatchMeta) -> Self {
        Self {
            pixels: self.pixels,
            meta,
        }
    }

    /// Replaces the pixel grid, keeping metadata. The new grid must have the
    /// same side length.
    pub(crate) fn with_pixels(&self, pixels: Image) -> Self {
        assert_eq!(pixels.height(), self.pixels.height());
        assert_eq!(pixels.width(), self.pixels.width());
        Self {
            pixels,
            meta: self.meta.clone(),
        }
    }
}

/// Quarter-turn rotation, counter-clockwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rotation {
    R0,
    R90,
    R180,
    R270,
}

impl Rotation {
    pub const ALL: [Rotation; 4] = [Rotation::R0, Rotation::R90, Rotation::R180, Rotation::R270];

    pub fn from_degrees(deg: u32) -> Result<Self> {
        match deg {
            0 => Ok(Rotation::R0),
            90 => Ok(Rotation::R90),
            180 => Ok(Rotation::R180),
            270 => Ok(Rotation::R270),
            other => Err(Error::InvalidRotation(other)),
        }
    }

    pub fn degrees(self) -> u32 {
        match self {
            Rotation::R0 => 0,
            Rotation::R90 => 90,
            Rotation::R180 => 180,
            Rotation::R270 => 270,
        }
    }

    /// The rotation that undoes this one.
    pub fn inverse(self) -> Self {
        match self {
            Rotation::R0 => Rotation::R0,
            Rotation::R90 => Rotation::R270,
            Rotation::R180 => Rotation::R180,
            Rotation::R270 => Rotation::R90,
        }
    }

    /// Composition: `self` followed by `other`.
    pub fn then(self, other: Rotation) -> Self {
        let deg = (self.degrees() + other.degrees()) % 360;
        Rotation::from_degrees(deg).expect("multiple of 90")
    }
}

/// One application of the patch operator: top-left corner plus quarter-turn.
///
/// `x` is the column offset and `y` the row offset, both 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub x: usize,
    pub y: usize,
    pub rot: Rotation,
}

impl Placement {
    pub fn new(x: usize, y: usize, rot: Rotation) -> Self {
        Self { x, y, rot }
    }

    /// Checks `0 <= x <= W-D` and `0 <= y <= H-D` for the target image.
    pub fn validate(&self, height: usize, width: usize, d: usize) -> Result<()> {
        if d > width || d > height || self.x > width - d || self.y > height - d {
            return Err(Error::PlacementOutOfBounds {
                x: self.x,
                y: self.y,
                rot: self.rot.degrees(),
                d,
                height,
                width,
            });
        }
        Ok(())
    }
}

/// Seed for every random choice in the toolkit. Equal seeds with equal
/// configs give bit-identical outputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed(pub u64);
