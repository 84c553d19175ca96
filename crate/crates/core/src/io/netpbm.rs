use std::fs;
use std::path::Path;

use crate::error::{invalid, FormatError, Result};
use crate::image::ScalarField;
use crate::levelset::Mask;
use crate::scalar::Scalar;

/// An 8-bit RGB raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub height: usize,
    pub width: usize,
    pub data: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn filled(height: usize, width: usize, color: [u8; 3]) -> Self {
        Self {
            height,
            width,
            data: vec![color; height * width],
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> [u8; 3] {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, color: [u8; 3]) {
        self.data[row * self.width + col] = color;
    }
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn skip_space(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> std::result::Result<usize, FormatError> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| FormatError::MalformedHeader(format!("missing or invalid {what}")))
    }
}

/// Parses a binary 8-bit PGM, mapping samples to `[0, 1]`.
pub fn decode_pgm<T: Scalar>(bytes: &[u8]) -> Result<ScalarField<T>> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(FormatError::MalformedHeader("not a netpbm file".into()).into());
    }
    match bytes[1] {
        b'5' => {}
        d @ b'1'..=b'7' => {
            return Err(FormatError::Unsupported(format!("P{} (only binary P5 is read)", d as char)).into());
        }
        _ => return Err(FormatError::MalformedHeader("not a netpbm file".into()).into()),
    }
    let mut hr = HeaderReader { bytes, pos: 2 };
    let width = hr.number("width")?;
    let height = hr.number("height")?;
    let maxval = hr.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(FormatError::MalformedHeader(format!("empty image {width}x{height}")).into());
    }
    if maxval == 0 || maxval > 65535 {
        return Err(FormatError::MalformedHeader(format!("maxval {maxval} out of range")).into());
    }
    if maxval > 255 {
        return Err(FormatError::Unsupported(format!("16-bit PGM (maxval {maxval})")).into());
    }
    match bytes.get(hr.pos) {
        Some(c) if c.is_ascii_whitespace() => hr.pos += 1,
        _ => return Err(FormatError::MalformedHeader("no whitespace after maxval".into()).into()),
    }
    let data = &bytes[hr.pos..];
    let n = width * height;
    if data.len() < n {
        return Err(FormatError::Truncated {
            expected: hr.pos + n,
            found: bytes.len(),
        }
        .into());
    }
    if data.len() > n {
        return Err(FormatError::TrailingData { extra: data.len() - n }.into());
    }
    let scale = T::from_count(maxval);
    let values = data.iter().map(|&b| T::from_count(b as usize) / scale).collect();
    ScalarField::new(height, width, values)
}

fn quantize<T: Scalar>(v: T) -> u8 {
    let v = v.as_f64().clamp(0.0, 1.0);
    (v * 255.0).round() as u8
}

/// Encodes a grid as P5; values are clamped to `[0, 1]` and scaled to 0..=255.
pub fn encode_pgm<T: Scalar>(field: &ScalarField<T>) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", field.width(), field.height()).into_bytes();
    out.extend(field.values().iter().map(|&v| quantize(v)));
    out
}

pub fn read_pgm<T: Scalar>(path: impl AsRef<Path>) -> Result<ScalarField<T>> {
    decode_pgm(&fs::read(path)?)
}

pub fn write_pgm<T: Scalar>(field: &ScalarField<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_pgm(field))?;
    Ok(())
}

/// Writes a mask as P5 with `false -> 0`, `true -> 255`.
pub fn write_mask_pgm(mask: &Mask, path: impl AsRef<Path>) -> Result<()> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    out.extend(mask.data().iter().map(|&b| if b { 255u8 } else { 0 }));
    fs::write(path, out)?;
    Ok(())
}

pub fn encode_ppm(img: &RgbImage) -> Result<Vec<u8>> {
    if img.data.len() != img.height * img.width {
        return Err(invalid("RGB buffer does not match dimensions"));
    }
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    for px in &img.data {
        out.extend_from_slice(px);
    }
    Ok(out)
}

pub fn write_ppm(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_ppm(img)?)?;
    Ok(())
}
