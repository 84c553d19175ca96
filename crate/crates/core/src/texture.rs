//! Texture features: each pixel of a grayscale image becomes the
//! second-moment matrix of the `M x M` patches found in a `W x W` window
//! around it, a point of SPD(M^2).
//!
//! The matrix is the *un-centered* average `(1 / W^2) sum N N^T` of the
//! row-major patch vectors `N`; no mean is subtracted. A small ridge on the
//! diagonal makes rank-deficient windows positive definite. Reads outside the
//! image replicate the nearest border pixel.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::geometry::{ManifoldKind, ManifoldPoint};
use crate::image::{ManifoldImage, ScalarField};
use crate::scalar::Scalar;

/// Relative ridge used by [`Ridge::Auto`]: a multiple of the mean diagonal.
pub const AUTO_RIDGE_FACTOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ridge<T> {
    /// `1e-6 *` the mean diagonal entry over all raw matrices of the image.
    Auto,
    Fixed(T),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TextureFeatureParams<T> {
    pub patch_size: usize,
    pub window_size: usize,
    pub ridge: Ridge<T>,
}

impl<T: Scalar> Default for TextureFeatureParams<T> {
    fn default() -> Self {
        Self {
            patch_size: 5,
            window_size: 13,
            ridge: Ridge::Auto,
        }
    }
}

impl<T: Scalar> TextureFeatureParams<T> {
    pub fn validate(&self) -> Result<()> {
        let (m, w) = (self.patch_size, self.window_size);
        if m < 3 || m % 2 == 0 {
            return Err(invalid(format!("patch size must be odd and >= 3, got {m}")));
        }
        if w < m || w % 2 == 0 {
            return Err(invalid(format!("window size must be odd and >= patch size, got {w}")));
        }
        if let Ridge::Fixed(r) = self.ridge {
            if !(r >= T::zero()) {
                return Err(invalid("ridge must be >= 0"));
            }
        }
        Ok(())
    }
}

#[inline]
fn clamped<T: Scalar>(img: &ScalarField<T>, row: isize, col: isize) -> T {
    let r = row.clamp(0, img.height() as isize - 1) as usize;
    let c = col.clamp(0, img.width() as isize - 1) as usize;
    img.get(r, c)
}

fn patch_at<T: Scalar>(img: &ScalarField<T>, row: isize, col: isize, m: usize, out: &mut Vec<T>) {
    let h = (m / 2) as isize;
    out.clear();
    for dr in -h..=h {
        for dc in -h..=h {
            out.push(clamped(img, row + dr, col + dc));
        }
    }
}

/// The `m x m` neighborhood of pixel `(x, y)` (`x` = row) flattened in
/// row-major order.
pub fn patch_vector<T: Scalar>(img: &ScalarField<T>, x: usize, y: usize, m: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(m * m);
    patch_at(img, x as isize, y as isize, m, &mut out);
    out
}

/// Second-moment matrix (row-major, `m^2 x m^2`) at `(x, y)` before the ridge
/// is added. Only positive semi-definite in general.
pub fn second_moment<T: Scalar>(img: &ScalarField<T>, x: usize, y: usize, m: usize, window: usize) -> Vec<T> {
    let d = m * m;
    let half = (window / 2) as isize;
    let mut acc = vec![T::zero(); d * d];
    let mut n = Vec::with_capacity(d);
    for dr in -half..=half {
        for dc in -half..=half {
            patch_at(img, x as isize + dr, y as isize + dc, m, &mut n);
            for i in 0..d {
                let ni = n[i];
                let row = &mut acc[i * d..];
                for j in i..d {
                    row[j] += ni * n[j];
                }
            }
        }
    }
    let count = T::from_count(window * window);
    for i in 0..d {
        for j in i..d {
            let v = acc[i * d + j] / count;
            acc[i * d + j] = v;
            acc[j * d + i] = v;
        }
    }
    acc
}

fn with_ridge<T: Scalar>(mut c: Vec<T>, d: usize, ridge: T) -> Vec<T> {
    for i in 0..d {
        c[i * d + i] += ridge;
    }
    c
}

/// Second-moment matrix at `(x, y)` with the given absolute ridge.
pub fn local_covariance<T: Scalar>(
    img: &ScalarField<T>,
    x: usize,
    y: usize,
    patch_size: usize,
    window_size: usize,
    ridge: T,
) -> Result<ManifoldPoint<T>> {
    if x >= img.height() || y >= img.width() {
        return Err(invalid(format!("pixel ({x}, {y}) outside image")));
    }
    let d = patch_size * patch_size;
    let c = with_ridge(second_moment(img, x, y, patch_size, window_size), d, ridge);
    ManifoldPoint::new(ManifoldKind::Spd(d), c)
}

fn mean_diagonal<T: Scalar>(raw: &[Vec<T>], d: usize) -> T {
    let mut total = T::zero();
    for c in raw {
        for i in 0..d {
            total += c[i * d + i];
        }
    }
    total / T::from_count(raw.len() * d)
}

/// Absolute ridge for `params` on `img`.
pub fn resolve_ridge<T: Scalar>(img: &ScalarField<T>, params: &TextureFeatureParams<T>) -> Result<T> {
    params.validate()?;
    match params.ridge {
        Ridge::Fixed(r) => Ok(r),
        Ridge::Auto => {
            let raw = raw_field(img, params);
            Ok(auto_ridge(&raw, params.patch_size * params.patch_size))
        }
    }
}

fn auto_ridge<T: Scalar>(raw: &[Vec<T>], d: usize) -> T {
    let r = T::lit(AUTO_RIDGE_FACTOR) * mean_diagonal(raw, d);
    r.max(T::tolerance(1e-12))
}

fn raw_field<T: Scalar>(img: &ScalarField<T>, params: &TextureFeatureParams<T>) -> Vec<Vec<T>> {
    let w = img.width();
    (0..img.height() * w)
        .into_par_iter()
        .map(|i| second_moment(img, i / w, i % w, params.patch_size, params.window_size))
        .collect()
}

/// Converts a grayscale image into an SPD(M^2)-valued image.
pub fn texture_to_mvi<T: Scalar>(img: &ScalarField<T>, params: &TextureFeatureParams<T>) -> Result<ManifoldImage<T>> {
    params.validate()?;
    let win = params.window_size;
    if img.height() < win || img.width() < win {
        return Err(invalid(format!(
            "image {}x{} is smaller than the {win}x{win} window",
            img.height(),
            img.width()
        )));
    }
    let d = params.patch_size * params.patch_size;
    let raw = raw_field(img, params);
    let ridge = match params.ridge {
        Ridge::Fixed(r) => r,
        Ridge::Auto => auto_ridge(&raw, d),
    };
    let kind = ManifoldKind::Spd(d);
    let pixels = raw
        .into_par_iter()
        .map(|c| ManifoldPoint::new_unchecked(kind, with_ridge(c, d, ridge)))
        .collect::<Result<Vec<_>>>()?;
    ManifoldImage::new(kind, img.height(), img.width(), pixels)
}

#[cfg(test)]
mod tests;
