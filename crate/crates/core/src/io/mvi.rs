use std::fs;
use std::path::Path;

use crate::error::{FormatError, Result};
use crate::geometry::{ManifoldKind, ManifoldPoint};
use crate::image::ManifoldImage;
use crate::scalar::Scalar;

pub const MVI_MAGIC: [u8; 4] = *b"MVI1";
const HEADER_LEN: usize = 4 + 1 + 2 + 4 + 4;

fn tag(kind: ManifoldKind) -> (u8, u16) {
    match kind {
        ManifoldKind::Euclidean(n) => (0, n as u16),
        ManifoldKind::Sphere1 => (1, 0),
        ManifoldKind::Sphere2 => (2, 0),
        ManifoldKind::SO3 => (3, 0),
        ManifoldKind::Spd(n) => (4, n as u16),
    }
}

fn kind_from_tag(tag: u8, dim: u16) -> std::result::Result<ManifoldKind, FormatError> {
    let n = dim as usize;
    let kind = match (tag, dim) {
        (0, 1..) => ManifoldKind::Euclidean(n),
        (4, 1..) => ManifoldKind::Spd(n),
        (1, 0) => ManifoldKind::Sphere1,
        (2, 0) => ManifoldKind::Sphere2,
        (3, 0) => ManifoldKind::SO3,
        (0 | 4, 0) => {
            return Err(FormatError::MalformedHeader(format!(
                "tag {tag} needs a positive dimension"
            )))
        }
        (1..=3, _) => {
            return Err(FormatError::MalformedHeader(format!(
                "tag {tag} must have dimension 0, got {dim}"
            )))
        }
        _ => return Err(FormatError::UnknownKind(tag)),
    };
    Ok(kind)
}

/// Serializes an image. Values are widened to `f64`.
pub fn encode_mvi<T: Scalar>(img: &ManifoldImage<T>) -> Result<Vec<u8>> {
    let kind = img.kind();
    let dim = match kind {
        ManifoldKind::Euclidean(n) | ManifoldKind::Spd(n) => n,
        _ => 0,
    };
    if dim > u16::MAX as usize {
        return Err(FormatError::Unsupported(format!("dimension {dim} exceeds the 16-bit header field")).into());
    }
    let (h, w) = (img.height(), img.width());
    if h > u32::MAX as usize || w > u32::MAX as usize {
        return Err(FormatError::Unsupported("image dimensions exceed 32 bits".into()).into());
    }
    let (t, d) = tag(kind);
    let mut out = Vec::with_capacity(HEADER_LEN + img.len() * kind.point_len() * 8);
    out.extend_from_slice(&MVI_MAGIC);
    out.push(t);
    out.extend_from_slice(&d.to_le_bytes());
    out.extend_from_slice(&(h as u32).to_le_bytes());
    out.extend_from_slice(&(w as u32).to_le_bytes());
    for p in img.pixels() {
        for v in p.data() {
            out.extend_from_slice(&v.as_f64().to_le_bytes());
        }
    }
    Ok(out)
}

/// Parses and validates an MVI byte stream.
pub fn decode_mvi<T: Scalar>(bytes: &[u8]) -> Result<ManifoldImage<T>> {
    if bytes.len() < HEADER_LEN {
        if bytes.len() >= 4 && bytes[..4] != MVI_MAGIC {
            return Err(FormatError::BadMagic(bytes[..4].try_into().unwrap()).into());
        }
        return Err(FormatError::Truncated {
            expected: HEADER_LEN,
            found: bytes.len(),
        }
        .into());
    }
    let magic: [u8; 4] = bytes[..4].try_into().unwrap();
    if magic != MVI_MAGIC {
        return Err(FormatError::BadMagic(magic).into());
    }
    let dim = u16::from_le_bytes([bytes[5], bytes[6]]);
    let kind = kind_from_tag(bytes[4], dim)?;
    let h = u32::from_le_bytes(bytes[7..11].try_into().unwrap()) as usize;
    let w = u32::from_le_bytes(bytes[11..15].try_into().unwrap()) as usize;
    if h == 0 || w == 0 {
        return Err(FormatError::MalformedHeader(format!("empty image {h}x{w}")).into());
    }
    let elem = kind.point_len();
    let expected = h
        .checked_mul(w)
        .and_then(|n| n.checked_mul(elem))
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or_else(|| FormatError::MalformedHeader("payload size overflows".into()))?;
    if bytes.len() < expected {
        return Err(FormatError::Truncated {
            expected,
            found: bytes.len(),
        }
        .into());
    }
    if bytes.len() > expected {
        return Err(FormatError::TrailingData {
            extra: bytes.len() - expected,
        }
        .into());
    }
    let mut pixels = Vec::with_capacity(h * w);
    for (index, chunk) in bytes[HEADER_LEN..].chunks_exact(elem * 8).enumerate() {
        let data: Vec<T> = chunk
            .chunks_exact(8)
            .map(|b| T::lit(f64::from_le_bytes(b.try_into().unwrap())))
            .collect();
        let p = ManifoldPoint::new_unchecked(kind, data)?;
        if let Err(reason) = p.validate() {
            return Err(FormatError::InvalidPixel {
                index,
                row: index / w,
                col: index % w,
                reason,
            }
            .into());
        }
        pixels.push(p);
    }
    ManifoldImage::new_unchecked(kind, h, w, pixels)
}

pub fn read_mvi<T: Scalar>(path: impl AsRef<Path>) -> Result<ManifoldImage<T>> {
    decode_mvi(&fs::read(path)?)
}

pub fn write_mvi<T: Scalar>(img: &ManifoldImage<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_mvi(img)?)?;
    Ok(())
}
