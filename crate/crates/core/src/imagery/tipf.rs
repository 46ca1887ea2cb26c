//! Binary patch container and a related multi-section float container.
//!
//! Patch file layout (all integers little-endian):
//!
//! ```text
//! magic "TIPF" | version u16 | C u16 | D_h u16 | D_w u16
//! | C*D_h*D_w payload floats, f32 LE
//! | u32 metadata length | UTF-8 JSON metadata
//! ```
//!
//! Floats are stored as f32; loading widens them back, so a save/load round
//! trip preserves every f32 bit pattern. The section container reuses the
//! same framing for weight files: a 4-byte magic, version, a section count,
//! then `u32 length | f32 LE...` per section, then the JSON trailer.

use super::{Image, Patch, PatchMeta, CHANNELS};
use crate::error::{Error, Result};
use std::fs;
use std::path::Path;

pub const TIPF_MAGIC: &[u8; 4] = b"TIPF";
pub const TIPF_VERSION: u16 = 1;

/// Serializes a patch. Pixels are narrowed to f32; metadata rides along as
/// JSON.
pub fn save_patch(patch: &Patch, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_patch(patch);
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })
}

/// Serializes a patch to its container bytes without touching disk.
pub fn encode_patch(patch: &Patch) -> Vec<u8> {
    let img = patch.pixels();
    let d = patch.size();
    let meta = serde_json::to_vec(patch.meta()).expect("meta serializes");
    let mut out = Vec::with_capacity(12 + 4 * CHANNELS * d * d + 4 + meta.len());
    out.extend_from_slice(TIPF_MAGIC);
    out.extend_from_slice(&TIPF_VERSION.to_le_bytes());
    out.extend_from_slice(&(CHANNELS as u16).to_le_bytes());
    out.extend_from_slice(&(d as u16).to_le_bytes());
    out.extend_from_slice(&(d as u16).to_le_bytes());
    for &v in img.data() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out.extend_from_slice(&(meta.len() as u32).to_le_bytes());
    out.extend_from_slice(&meta);
    out
}

pub fn load_patch(path: impl AsRef<Path>) -> Result<Patch> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })?;
    decode_patch(path, &bytes)
}

fn decode_patch(path: &Path, bytes: &[u8]) -> Result<Patch> {
    let mut r = Cursor::new(path, bytes);
    let magic = r.take(4)?;
    if magic != TIPF_MAGIC {
        return Err(Error::BadMagic {
            path: path.into(),
            found: String::from_utf8_lossy(magic).into_owned(),
            expected: "TIPF".into(),
        });
    }
    let version = r.u16()?;
    if version != TIPF_VERSION {
        return Err(Error::DimensionMismatch {
            path: path.into(),
            detail: format!("unsupported version {version}"),
        });
    }
    let c = r.u16()? as usize;
    let dh = r.u16()? as usize;
    let dw = r.u16()? as usize;
    if c != CHANNELS {
        return Err(Error::DimensionMismatch {
            path: path.into(),
            detail: format!("channel count {c}, expected {CHANNELS}"),
        });
    }
    if dh != dw || dh < 2 {
        return Err(Error::DimensionMismatch {
            path: path.into(),
            detail: format!("patch must be square with side >= 2, got {dh}x{dw}"),
        });
    }
    let n = c * dh * dw;
    let mut data = Vec::with_capacity(n);
    for _ in 0..n {
        let v = f32::from_le_bytes(r.take(4)?.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::NonFinitePayload { path: path.into() });
        }
        data.push(f64::from(v));
    }
    let meta_len = r.u32()? as usize;
    let meta_bytes = r.take(meta_len)?;
    let meta: PatchMeta =
        serde_json::from_slice(meta_bytes).map_err(|e| Error::MalformedHeader {
            path: path.into(),
            offset: bytes.len() - meta_len,
            reason: format!("metadata: {e}"),
        })?;
    // f32 rounding can nudge samples a hair outside [0,1]; files written by
    // this crate never do, but clamp-validate through Image anyway.
    let img = Image::new(dh, dw, data).map_err(|e| Error::MalformedHeader {
        path: path.into(),
        offset: 12,
        reason: e.to_string(),
    })?;
    Patch::new(img, meta).map_err(|e| Error::MalformedHeader {
        path: path.into(),
        offset: 12,
        reason: e.to_string(),
    })
}

/// Multi-section f32 container sharing the TIPF framing; used for metric
/// weight files.
pub struct SectionFile {
    pub magic: [u8; 4],
    pub version: u16,
    pub sections: Vec<Vec<f32>>,
    pub meta_json: Vec<u8>,
}

impl SectionFile {
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.encode()).map_err(|source| Error::Io {
            path: path.into(),
            source,
        })
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&self.magic);
        out.extend_from_slice(&self.version.to_le_bytes());
        out.extend_from_slice(&(self.sections.len() as u16).to_le_bytes());
        for s in &self.sections {
            out.extend_from_slice(&(s.len() as u32).to_le_bytes());
            for v in s {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out.extend_from_slice(&(self.meta_json.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.meta_json);
        out
    }

    pub fn read(path: impl AsRef<Path>, expect_magic: &[u8; 4]) -> Result<SectionFile> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|source| Error::Io {
            path: path.into(),
            source,
        })?;
        Self::decode(path, &bytes, expect_magic)
    }

    pub fn decode(path: &Path, bytes: &[u8], expect_magic: &[u8; 4]) -> Result<SectionFile> {
        let mut r = Cursor::new(path, bytes);
        let magic: [u8; 4] = r.take(4)?.try_into().unwrap();
        if &magic != expect_magic {
            return Err(Error::BadMagic {
                path: path.into(),
                found: String::from_utf8_lossy(&magic).into_owned(),
                expected: String::from_utf8_lossy(expect_magic).into_owned(),
            });
        }
        let version = r.u16()?;
        let n_sections = r.u16()? as usize;
        let mut sections = Vec::with_capacity(n_sections);
        for _ in 0..n_sections {
            let len = r.u32()? as usize;
            let mut s = Vec::with_capacity(len);
            for _ in 0..len {
                let v = f32::from_le_bytes(r.take(4)?.try_into().unwrap());
                if !v.is_finite() {
                    return Err(Error::NonFinitePayload { path: path.into() });
                }
                s.push(v);
            }
            sections.push(s);
        }
        let meta_len = r.u32()? as usize;
        let meta_json = r.take(meta_len)?.to_vec();
        Ok(SectionFile {
            magic,
            version,
            sections,
            meta_json,
        })
    }
}

struct Cursor<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(path: &'a Path, bytes: &'a [u8]) -> Self {
        Self {
            path,
            bytes,
            pos: 0,
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Truncated {
                path: self.path.into(),
                offset: self.bytes.len(),
                expected: self.pos + n - self.bytes.len(),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}
