//! Patch application and its geometric/photometric companions: quarter-turn
//! rotation, random placement, tiling, relighting, and black-white
//! projection.
//!
//! All operations are pure functions over immutable inputs. Rotation is
//! counter-clockwise; coordinates are 0-based with `x` the column and `y`
//! the row.

use crate::error::{Error, Result};
use crate::imagery::{Image, Patch, Placement, RngStream, Rotation, Tensor, CHANNELS};

/// Binary footprint of one patch application: a single `D x D` axis-aligned
/// square of ones, identical in all three channels.
#[derive(Clone, Debug)]
pub struct Mask {
    height: usize,
    width: usize,
    d: usize,
    placement: Placement,
}

impl Mask {
    pub fn new(height: usize, width: usize, d: usize, placement: Placement) -> Result<Self> {
        placement.validate(height, width, d)?;
        Ok(Self {
            height,
            width,
            d,
            placement,
        })
    }

    #[inline]
    pub fn contains(&self, y: usize, x: usize) -> bool {
        y >= self.placement.y
            && y < self.placement.y + self.d
            && x >= self.placement.x
            && x < self.placement.x + self.d
    }

    /// Indicator value, identical for every channel.
    #[inline]
    pub fn value(&self, y: usize, x: usize) -> f64 {
        if self.contains(y, x) {
            1.0
        } else {
            0.0
        }
    }

    /// Total ones over all three channels: `3 * D * D`.
    pub fn ones_total(&self) -> usize {
        CHANNELS * self.d * self.d
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }
}

/// Rotates a square pixel grid counter-clockwise by a quarter-turn multiple.
/// Pure index permutation, no interpolation: for a single CCW turn,
/// `out[r][c] = in[c][D-1-r]`.
fn rotate_square<T: Copy>(
    d: usize,
    rot: Rotation,
    get: impl Fn(usize, usize, usize) -> T,
    set: &mut impl FnMut(usize, usize, usize, T),
) {
    for c in 0..CHANNELS {
        for r in 0..d {
            for col in 0..d {
                let v = match rot {
                    Rotation::R0 => get(c, r, col),
                    Rotation::R90 => get(c, col, d - 1 - r),
                    Rotation::R180 => get(c, d - 1 - r, d - 1 - col),
                    Rotation::R270 => get(c, d - 1 - col, r),
                };
                set(c, r, col, v);
            }
        }
    }
}

/// Rotated copy of a patch; metadata is preserved.
pub fn rotate90(p: &Patch, rot: Rotation) -> Patch {
    let d = p.size();
    if rot == Rotation::R0 {
        return p.clone();
    }
    let src = p.pixels();
    let mut data = vec![0.0; CHANNELS * d * d];
    rotate_square(
        d,
        rot,
        |c, y, x| src.get(c, y, x),
        &mut |c, y, x, v| data[(c * d + y) * d + x] = v,
    );
    let img = Image::new(d, d, data).expect("rotation permutes valid samples");
    p.with_pixels(img)
}

/// Rotates an image-shaped buffer of patch size; used to route gradients back
/// into patch coordinates.
pub(crate) fn rotate_tensor90(t: &Tensor, rot: Rotation) -> Tensor {
    assert_eq!(t.height(), t.width());
    let d = t.height();
    if rot == Rotation::R0 {
        return t.clone();
    }
    let mut data = vec![0.0; CHANNELS * d * d];
    rotate_square(
        d,
        rot,
        |c, y, x| t.get(c, y, x),
        &mut |c, y, x, v| data[(c * d + y) * d + x] = v,
    );
    Tensor::from_data(d, d, data)
}

/// Composites the (rotated) patch into the image at the placement: inside the
/// footprint the output equals the patch, outside it equals the input. The
/// input is not modified.
pub fn apply_patch(img: &Image, p: &Patch, pl: &Placement) -> Result<Image> {
    let d = p.size();
    pl.validate(img.height(), img.width(), d)?;
    let rotated = rotate90(p, pl.rot);
    let mut out = img.clone();
    let (h, w) = (img.height(), img.width());
    let src = rotated.pixels();
    let data = out.data_mut();
    for c in 0..CHANNELS {
        for r in 0..d {
            let dst_row = (c * h + pl.y + r) * w + pl.x;
            let src_row = (c * d + r) * d;
            data[dst_row..dst_row + d].copy_from_slice(&src.data()[src_row..src_row + d]);
        }
    }
    Ok(out)
}

/// Draws a placement uniformly over the valid grid: `x` from `[0, W-D]`,
/// then `y` from `[0, H-D]`, then (only when `with_rotation`) one of the four
/// quarter-turns. Draw order is part of the reproducibility contract.
pub fn random_placement(
    rng: &mut RngStream,
    dims: (usize, usize),
    d: usize,
    with_rotation: bool,
) -> Result<Placement> {
    let (height, width) = dims;
    if d > height || d > width {
        return Err(Error::PatchTooLarge { d, height, width });
    }
    let x = rng.uniform_inclusive(0, (width - d) as u64) as usize;
    let y = rng.uniform_inclusive(0, (height - d) as u64) as usize;
    let rot = if with_rotation {
        Rotation::ALL[rng.uniform_u64(4) as usize]
    } else {
        Rotation::R0
    };
    Ok(Placement::new(x, y, rot))
}

/// Rectangular tiling target within an image.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TileSpec {
    pub x0: usize,
    pub y0: usize,
    pub w: usize,
    pub h: usize,
    /// Pixels between adjacent tiles.
    pub gap: usize,
    /// Crop tiles that overrun the region edge; when false they are omitted.
    pub crop_partial: bool,
}

impl TileSpec {
    pub fn new(x0: usize, y0: usize, w: usize, h: usize) -> Self {
        Self {
            x0,
            y0,
            w,
            h,
            gap: 0,
            crop_partial: true,
        }
    }

    /// Wallpaper mode: the whole frame.
    pub fn full_frame(height: usize, width: usize) -> Self {
        Self::new(0, 0, width, height)
    }

    pub fn with_gap(mut self, gap: usize) -> Self {
        self.gap = gap;
        self
    }

    pub fn with_crop_partial(mut self, crop: bool) -> Self {
        self.crop_partial = crop;
        self
    }

    pub fn validate(&self, img: &Image) -> Result<()> {
        if self.w == 0 || self.h == 0 {
            return Err(Error::InvalidRegion("region must be non-empty".into()));
        }
        if self.x0 + self.w > img.width() || self.y0 + self.h > img.height() {
            return Err(Error::InvalidRegion(format!(
                "region ({},{})+{}x{} exceeds image {}x{}",
                self.x0,
                self.y0,
                self.w,
                self.h,
                img.width(),
                img.height()
            )));
        }
        Ok(())
    }

    /// Number of pixels the tiling covers, given tile side `d`.
    pub fn footprint_pixels(&self, d: usize) -> usize {
        let stride = d + self.gap;
        let mut total = 0;
        let mut ty = 0;
        while ty < self.h {
            let th = d.min(self.h - ty);
            if th < d && !self.crop_partial {
                break;
            }
            let mut tx = 0;
            while tx < self.w {
                let tw = d.min(self.w - tx);
                if tw < d && !self.crop_partial {
                    break;
                }
                total += th * tw;
                tx += stride;
            }
            ty += stride;
        }
        total
    }
}

/// Lays the unrotated patch out in a row-major grid from the region origin;
/// pixels outside the region are untouched.
pub fn tile_patch(img: &Image, p: &Patch, spec: &TileSpec) -> Result<Image> {
    spec.validate(img)?;
    let d = p.size();
    let (h, w) = (img.height(), img.width());
    let mut out = img.clone();
    let data = out.data_mut();
    let src = p.pixels();
    let stride = d + spec.gap;
    let mut ty = 0;
    while ty < spec.h {
        let th = d.min(spec.h - ty);
        if th < d && !spec.crop_partial {
            break;
        }
        let mut tx = 0;
        while tx < spec.w {
            let tw = d.min(spec.w - tx);
            if tw < d && !spec.crop_partial {
                break;
            }
            for c in 0..CHANNELS {
                for r in 0..th {
                    let dst = (c * h + spec.y0 + ty + r) * w + spec.x0 + tx;
                    let s = (c * d + r) * d;
                    data[dst..dst + tw].copy_from_slice(&src.data()[s..s + tw]);
                }
            }
            tx += stride;
        }
        ty += stride;
    }
    Ok(out)
}

/// Adds one global brightness offset drawn uniformly from
/// `[-max_delta, +max_delta]` to every sample, then clamps to `[0, 1]`.
pub fn relight(img: &Image, rng: &mut RngStream, max_delta: f64) -> Result<Image> {
    let delta = draw_relight_delta(rng, max_delta)?;
    Ok(shift_clamp(img, delta))
}

/// Relights the pixel grid of a patch, keeping metadata.
pub fn relight_patch(p: &Patch, rng: &mut RngStream, max_delta: f64) -> Result<Patch> {
    let lit = relight(p.pixels(), rng, max_delta)?;
    Ok(p.with_pixels(lit))
}

pub(crate) fn draw_relight_delta(rng: &mut RngStream, max_delta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&max_delta) {
        return Err(Error::InvalidRelight(max_delta));
    }
    Ok(rng.range_f64(-max_delta, max_delta))
}

pub(crate) fn shift_clamp(img: &Image, delta: f64) -> Image {
    let data = img
        .data()
        .iter()
        .map(|v| (v + delta).clamp(0.0, 1.0))
        .collect();
    Image::new(img.height(), img.width(), data).expect("clamped samples are valid")
}

/// Rec.601 luma weights.
const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

/// Grayscale projection: every channel becomes the Rec.601 luma
/// `0.299 R + 0.587 G + 0.114 B`. Idempotent.
pub fn bw_project(p: &Patch) -> Patch {
    let d = p.size();
    let src = p.pixels();
    let img = Image::from_fn(d, d, |_, y, x| {
        let px = src.pixel(y, x);
        (LUMA[0] * px[0] + LUMA[1] * px[1] + LUMA[2] * px[2]).clamp(0.0, 1.0)
    })
    .expect("luma of valid samples is valid");
    p.with_pixels(img)
}

/// Pure black/white export: luma thresholded at `threshold`.
pub fn bw_threshold(p: &Patch, threshold: f64) -> Patch {
    let d = p.size();
    let src = p.pixels();
    let img = Image::from_fn(d, d, |_, y, x| {
        let px = src.pixel(y, x);
        let luma = LUMA[0] * px[0] + LUMA[1] * px[1] + LUMA[2] * px[2];
        if luma >= threshold {
            1.0
        } else {
            0.0
        }
    })
    .expect("thresholded samples are valid");
    p.with_pixels(img)
}
