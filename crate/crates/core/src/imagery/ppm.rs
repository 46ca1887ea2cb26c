//! Image file I/O: binary PPM (P6) as the interchange format, plus 8-bit RGB
//! PNG as a load/save convenience.
//!
//! Loading maps byte `b` to `b/255` exactly; saving maps `f` to
//! `round(f*255)` (half up) clamped to `[0, 255]`.

use super::{dequantize8, quantize8, Image, CHANNELS};
use crate::error::{Error, Result};
use std::fs;
use std::io::BufWriter;
use std::path::Path;

/// Loads a P6 PPM or an 8-bit RGB PNG, sniffing the magic bytes.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })?;
    if bytes.starts_with(b"\x89PNG") {
        return load_png(path, &bytes);
    }
    load_ppm(path, &bytes)
}

/// Writes a P6 PPM, or an 8-bit RGB PNG when the path ends in `.png`.
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")) {
        return save_png(img, path);
    }
    let bytes = encode_ppm(img);
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })
}

pub(crate) fn encode_ppm(img: &Image) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + CHANNELS * img.height() * img.width());
    out.extend_from_slice(format!("P6\n{} {}\n255\n", img.width(), img.height()).as_bytes());
    for y in 0..img.height() {
        for x in 0..img.width() {
            for c in 0..CHANNELS {
                out.push(quantize8(img.get(c, y, x)));
            }
        }
    }
    out
}

fn load_ppm(path: &Path, bytes: &[u8]) -> Result<Image> {
    let mut pos = 0usize;
    let magic = take_token(path, bytes, &mut pos)?;
    if magic != b"P6" {
        if magic == b"P5" || magic == b"P4" || magic == b"P1" || magic == b"P2" || magic == b"P3" {
            return Err(Error::NonRgb {
                path: path.into(),
                detail: format!(
                    "{} is not a binary RGB map (P6)",
                    String::from_utf8_lossy(magic)
                ),
            });
        }
        return Err(Error::BadMagic {
            path: path.into(),
            found: String::from_utf8_lossy(magic).into_owned(),
            expected: "P6".into(),
        });
    }
    let width = parse_dim(path, bytes, &mut pos, "width")?;
    let height = parse_dim(path, bytes, &mut pos, "height")?;
    let maxval = parse_dim(path, bytes, &mut pos, "maxval")?;
    if maxval != 255 {
        return Err(Error::NonRgb {
            path: path.into(),
            detail: format!("maxval {maxval} unsupported, only 8-bit (255)"),
        });
    }
    // Exactly one whitespace byte separates the header from the payload.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::MalformedHeader {
            path: path.into(),
            offset: pos,
            reason: "missing whitespace before payload".into(),
        });
    }
    pos += 1;
    let expected = CHANNELS * width * height;
    let payload = &bytes[pos.min(bytes.len())..];
    if payload.len() < expected {
        return Err(Error::Truncated {
            path: path.into(),
            offset: pos + payload.len(),
            expected: expected - payload.len(),
        });
    }
    let mut data = vec![0.0f64; expected];
    let (h, w) = (height, width);
    for y in 0..h {
        for x in 0..w {
            let base = (y * w + x) * CHANNELS;
            for c in 0..CHANNELS {
                data[(c * h + y) * w + x] = dequantize8(payload[base + c]);
            }
        }
    }
    Image::new(height, width, data)
}

/// Reads one whitespace-delimited token, skipping `#` comments.
fn take_token<'a>(path: &Path, bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::MalformedHeader {
            path: path.into(),
            offset: start,
            reason: "unexpected end of header".into(),
        });
    }
    Ok(&bytes[start..*pos])
}

fn parse_dim(path: &Path, bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = take_token(path, bytes, pos)?;
    let offset = *pos - tok.len();
    let s = std::str::from_utf8(tok).map_err(|_| Error::MalformedHeader {
        path: path.into(),
        offset,
        reason: format!("{what} is not ASCII"),
    })?;
    let v: usize = s.parse().map_err(|_| Error::MalformedHeader {
        path: path.into(),
        offset,
        reason: format!("{what} {s:?} is not a positive integer"),
    })?;
    if v == 0 {
        return Err(Error::MalformedHeader {
            path: path.into(),
            offset,
            reason: format!("{what} must be positive"),
        });
    }
    Ok(v)
}

fn load_png(path: &Path, bytes: &[u8]) -> Result<Image> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder.read_info().map_err(|e| Error::MalformedHeader {
        path: path.into(),
        offset: 0,
        reason: e.to_string(),
    })?;
    let mut buf = vec![0u8; reader.output_buffer_size().unwrap_or(0)];
    let info = reader.next_frame(&mut buf).map_err(|e| Error::MalformedHeader {
        path: path.into(),
        offset: 0,
        reason: e.to_string(),
    })?;
    if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
        return Err(Error::NonRgb {
            path: path.into(),
            detail: format!(
                "PNG color type {:?} / {:?}, expected 8-bit RGB",
                info.color_type, info.bit_depth
            ),
        });
    }
    let (width, height) = (info.width as usize, info.height as usize);
    let payload = &buf[..info.buffer_size()];
    let mut data = vec![0.0f64; CHANNELS * width * height];
    for y in 0..height {
        for x in 0..width {
            let base = (y * width + x) * CHANNELS;
            for c in 0..CHANNELS {
                data[(c * height + y) * width + x] = dequantize8(payload[base + c]);
            }
        }
    }
    Image::new(height, width, data)
}

fn save_png(img: &Image, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })?;
    let mut encoder = png::Encoder::new(
        BufWriter::new(file),
        img.width() as u32,
        img.height() as u32,
    );
    encoder.set_color(png::ColorType::Rgb);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header().map_err(|e| Error::Io {
        path: path.into(),
        source: std::io::Error::other(e.to_string()),
    })?;
    let mut payload = Vec::with_capacity(CHANNELS * img.height() * img.width());
    for y in 0..img.height() {
        for x in 0..img.width() {
            for c in 0..CHANNELS {
                payload.push(quantize8(img.get(c, y, x)));
            }
        }
    }
    writer.write_image_data(&payload).map_err(|e| Error::Io {
        path: path.into(),
        source: std::io::Error::other(e.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagery::{RngStream, Seed};
    use tempfile::tempdir;

    #[test]
    fn one_pixel_red() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("red.ppm");
        fs::write(&p, b"P6\n1 1\n255\n\xff\x00\x00").unwrap();
        let img = load_image(&p).unwrap();
        assert_eq!(img.data(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn two_by_two_zeros() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("z.ppm");
        fs::write(&p, [b"P6\n2 2\n255\n".as_ref(), &[0u8; 12]].concat()).unwrap();
        let img = load_image(&p).unwrap();
        assert!(img.data().iter().all(|&v| v == 0.0));
        assert_eq!((img.height(), img.width()), (2, 2));
    }

    #[test]
    fn header_comments_are_skipped() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("c.ppm");
        fs::write(&p, b"P6\n# made by hand\n1 1\n255\n\x80\x80\x80").unwrap();
        let img = load_image(&p).unwrap();
        assert_eq!(img.get(0, 0, 0), 128.0 / 255.0);
    }

    #[test]
    fn grayscale_magic_is_rejected_as_non_rgb() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("g.pgm");
        fs::write(&p, b"P5\n1 1\n255\n\x00").unwrap();
        match load_image(&p) {
            Err(Error::NonRgb { .. }) => {}
            other => panic!("expected NonRgb, got {other:?}"),
        }
    }

    #[test]
    fn truncated_payload_reports_offset() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("t.ppm");
        fs::write(&p, b"P6\n2 2\n255\n\x01\x02").unwrap();
        match load_image(&p) {
            Err(Error::Truncated { expected, .. }) => assert_eq!(expected, 10),
            other => panic!("expected Truncated, got {other:?}"),
        }
    }

    #[test]
    fn malformed_header_reports_offset() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("m.ppm");
        fs::write(&p, b"P6\nxx 2\n255\n").unwrap();
        match load_image(&p) {
            Err(Error::MalformedHeader { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("expected MalformedHeader, got {other:?}"),
        }
    }

    fn random_image(h: usize, w: usize, seed: u64) -> Image {
        let mut rng = RngStream::new(Seed(seed), "test-image");
        Image::from_fn(h, w, |_, _, _| rng.uniform_f64()).unwrap()
    }

    #[test]
    fn round_trip_after_quantization_is_exact() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("rt.ppm");
        let img = random_image(16, 16, 1);
        save_image(&img, &p).unwrap();
        let back = load_image(&p).unwrap();
        let quantized =
            Image::new(16, 16, img.data().iter().map(|&v| dequantize8(quantize8(v))).collect())
                .unwrap();
        assert_eq!(back, quantized);
    }

    #[test]
    fn save_load_save_is_byte_idempotent() {
        let dir = tempdir().unwrap();
        let a = dir.path().join("a.ppm");
        let b = dir.path().join("b.ppm");
        let img = random_image(9, 13, 2);
        save_image(&img, &a).unwrap();
        let img2 = load_image(&a).unwrap();
        save_image(&img2, &b).unwrap();
        assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
    }

    #[test]
    fn png_round_trip_matches_ppm_quantization() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("x.png");
        let img = random_image(7, 5, 3);
        save_image(&img, &p).unwrap();
        let back = load_image(&p).unwrap();
        for (a, b) in back.data().iter().zip(img.data()) {
            assert_eq!(*a, dequantize8(quantize8(*b)));
        }
    }
}
