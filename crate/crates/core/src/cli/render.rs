use crate::error::{invalid, Result};
use crate::geometry::{log_map, ManifoldKind, ManifoldPoint};
use crate::image::ManifoldImage;
use crate::io::RgbImage;
use crate::levelset::Mask;

const RED: [u8; 3] = [255, 0, 0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderOptions {
    /// Side of the square cell holding one SPD(3) glyph.
    pub glyph_cell: usize,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self { glyph_cell: 8 }
    }
}

fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// HSV with all channels in `[0, 1]`.
fn hsv(h: f64, s: f64, v: f64) -> [u8; 3] {
    let h6 = h.rem_euclid(1.0) * 6.0;
    let i = h6.floor();
    let f = h6 - i;
    let (p, q, t) = (v * (1.0 - s), v * (1.0 - s * f), v * (1.0 - s * (1.0 - f)));
    let (r, g, b) = match i as u32 % 6 {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    [to_byte(r), to_byte(g), to_byte(b)]
}

fn direction_color(p: &ManifoldPoint<f64>) -> [u8; 3] {
    let d = p.data();
    let hue = d[1].atan2(d[0]) / std::f64::consts::TAU;
    match p.kind() {
        ManifoldKind::Sphere1 => hsv(hue, 1.0, 1.0),
        // Azimuth sets the hue, height the brightness.
        _ => hsv(hue, 1.0, 0.25 + 0.75 * (1.0 + d[2]) / 2.0),
    }
}

fn rotation_color(p: &ManifoldPoint<f64>) -> [u8; 3] {
    let w = match log_map(&ManifoldPoint::rotation([0.0; 3]), p) {
        Ok(v) => v.data().to_vec(),
        // Half turn: the axis is the eigenvector of R + I.
        Err(_) => {
            let r = p.data();
            let id = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
            let col = (0..3)
                .map(|j| [r[j] + id(0, j), r[3 + j] + id(1, j), r[6 + j] + id(2, j)])
                .max_by(|a, b| norm3(a).total_cmp(&norm3(b)))
                .unwrap();
            let n = norm3(&col);
            col.iter().map(|c| c / n * std::f64::consts::PI).collect()
        }
    };
    let theta = norm3(&[w[0], w[1], w[2]]);
    let brightness = 0.3 + 0.7 * theta / std::f64::consts::PI;
    let axis = if theta > 0.0 {
        [w[0] / theta, w[1] / theta, w[2] / theta]
    } else {
        [0.0; 3]
    };
    [
        to_byte((0.5 + 0.5 * axis[0]) * brightness),
        to_byte((0.5 + 0.5 * axis[1]) * brightness),
        to_byte((0.5 + 0.5 * axis[2]) * brightness),
    ]
}

fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn gray_by(img: &ManifoldImage<f64>, f: impl Fn(&ManifoldPoint<f64>) -> f64) -> Vec<[u8; 3]> {
    let vals: Vec<f64> = img.pixels().iter().map(f).collect();
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    vals.iter()
        .map(|&v| {
            let g = if hi > lo { to_byte((v - lo) / (hi - lo)) } else { 128 };
            [g, g, g]
        })
        .collect()
}

fn boundary(mask: &Mask, r: usize, c: usize) -> bool {
    if !mask.get(r, c) {
        return false;
    }
    let (h, w) = (mask.height(), mask.width());
    r == 0
        || c == 0
        || r + 1 == h
        || c + 1 == w
        || !mask.get(r - 1, c)
        || !mask.get(r + 1, c)
        || !mask.get(r, c - 1)
        || !mask.get(r, c + 1)
}

/// Draws each SPD(3) pixel as the shadow of its ellipsoid `x^T C^-1 x <= 1`
/// on the image plane: the ellipse of the leading 2x2 block, scaled so the
/// largest semi-axis in the image fills 45% of a cell.
fn glyphs(img: &ManifoldImage<f64>, cell: usize, mask: Option<&Mask>) -> Result<RgbImage> {
    let (h, w) = (img.height(), img.width());
    let mut out = RgbImage::filled(h * cell, w * cell, [0, 0, 0]);
    let blocks: Vec<[f64; 3]> = img
        .pixels()
        .iter()
        .map(|p| {
            let d = p.data();
            [d[0], d[1], d[4]]
        })
        .collect();
    let largest = blocks
        .iter()
        .map(|&[a, b, c]| (a + c) / 2.0 + (((a - c) / 2.0).powi(2) + b * b).sqrt())
        .fold(0.0, f64::max);
    let scale = 0.45 * cell as f64 / largest.sqrt();
    for (i, (&[a, b, c], p)) in blocks.iter().zip(img.pixels()).enumerate() {
        let (r0, c0) = ((i / w) * cell, (i % w) * cell);
        // Points y inside the ellipse satisfy y^T B^-1 y <= scale^2.
        let det = a * c - b * b;
        let (ia, ib, ic) = (c / det, -b / det, a / det);
        let color = principal_color(p)?;
        let mid = (cell as f64 - 1.0) / 2.0;
        for dr in 0..cell {
            for dc in 0..cell {
                let (x, y) = (dc as f64 - mid, dr as f64 - mid);
                if ia * x * x + 2.0 * ib * x * y + ic * y * y <= scale * scale {
                    out.set(r0 + dr, c0 + dc, color);
                }
            }
        }
        if let Some(m) = mask {
            if boundary(m, i / w, i % w) {
                for k in 0..cell {
                    out.set(r0, c0 + k, RED);
                    out.set(r0 + cell - 1, c0 + k, RED);
                    out.set(r0 + k, c0, RED);
                    out.set(r0 + k, c0 + cell - 1, RED);
                }
            }
        }
    }
    Ok(out)
}

/// Color from the absolute principal eigenvector.
fn principal_color(p: &ManifoldPoint<f64>) -> Result<[u8; 3]> {
    let m = crate::geometry::spd::matrix(3, p.data());
    let eig = nalgebra::SymmetricEigen::new(m);
    let k = eig.eigenvalues.imax();
    let v = eig.eigenvectors.column(k);
    Ok([to_byte(v[0].abs()), to_byte(v[1].abs()), to_byte(v[2].abs())])
}

/// Rasterizes an image: S1/S2 as HSV direction maps, SO3 by axis and angle,
/// SPD(3) as ellipse glyphs, anything else as normalized gray. The mask
/// boundary, if given, is drawn in red.
pub fn render(img: &ManifoldImage<f64>, mask: Option<&Mask>, opts: &RenderOptions) -> Result<RgbImage> {
    if let Some(m) = mask {
        if m.height() != img.height() || m.width() != img.width() {
            return Err(invalid("mask dimensions differ from the image"));
        }
    }
    if img.kind() == ManifoldKind::Spd(3) {
        if opts.glyph_cell < 3 {
            return Err(invalid("glyph cell must be at least 3 pixels"));
        }
        return glyphs(img, opts.glyph_cell, mask);
    }
    let data = match img.kind() {
        ManifoldKind::Sphere1 | ManifoldKind::Sphere2 => img.pixels().iter().map(direction_color).collect(),
        ManifoldKind::SO3 => img.pixels().iter().map(rotation_color).collect(),
        ManifoldKind::Euclidean(_) => gray_by(img, |p| p.data()[0]),
        ManifoldKind::Spd(n) => gray_by(img, |p| (0..n).map(|i| p.data()[i * n + i].ln()).sum()),
    };
    let mut out = RgbImage {
        height: img.height(),
        width: img.width(),
        data,
    };
    if let Some(m) = mask {
        for r in 0..img.height() {
            for c in 0..img.width() {
                if boundary(m, r, c) {
                    out.set(r, c, RED);
                }
            }
        }
    }
    Ok(out)
}
