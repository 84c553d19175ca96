//! Manifold-valued images and their gradient magnitude.
//!
//! Pixel `(row, col)` corresponds to `I(p, q)` with `p = row`, `q = col`;
//! the "x" derivative runs down the rows and the "y" derivative along the
//! columns.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::geometry::{self, log_map, ManifoldKind, ManifoldPoint, TangentVector};
use crate::scalar::Scalar;

/// An `height x width` grid of points on one manifold, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldImage<T> {
    kind: ManifoldKind,
    height: usize,
    width: usize,
    pixels: Vec<ManifoldPoint<T>>,
}

impl<T: Scalar> ManifoldImage<T> {
    /// Builds an image, validating every pixel.
    pub fn new(kind: ManifoldKind, height: usize, width: usize, pixels: Vec<ManifoldPoint<T>>) -> Result<Self> {
        let img = Self::new_unchecked(kind, height, width, pixels)?;
        if let Some((i, reason)) = img.first_invalid_pixel() {
            return Err(invalid(format!(
                "pixel {i} (row {}, col {}): {reason}",
                i / width,
                i % width
            )));
        }
        Ok(img)
    }

    /// Builds an image checking only shape and pixel kinds.
    pub fn new_unchecked(
        kind: ManifoldKind,
        height: usize,
        width: usize,
        pixels: Vec<ManifoldPoint<T>>,
    ) -> Result<Self> {
        kind.validate()?;
        if height == 0 || width == 0 {
            return Err(invalid("image dimensions must be positive"));
        }
        if pixels.len() != height * width {
            return Err(invalid(format!(
                "{height}x{width} image needs {} pixels, got {}",
                height * width,
                pixels.len()
            )));
        }
        if pixels.iter().any(|p| p.kind() != kind) {
            return Err(invalid(format!("all pixels must lie on {kind}")));
        }
        Ok(Self {
            kind,
            height,
            width,
            pixels,
        })
    }

    pub fn from_fn(
        kind: ManifoldKind,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> ManifoldPoint<T>,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c));
            }
        }
        Self::new(kind, height, width, pixels)
    }

    pub fn constant(height: usize, width: usize, value: ManifoldPoint<T>) -> Result<Self> {
        let kind = value.kind();
        Self::new(kind, height, width, vec![value; height * width])
    }

    /// Wraps a scalar grid as an image on `Euclidean(1)`.
    pub fn from_gray(height: usize, width: usize, values: &[T]) -> Result<Self> {
        if values.len() != height * width {
            return Err(invalid("gray value count does not match dimensions"));
        }
        let kind = ManifoldKind::Euclidean(1);
        let pixels = values
            .iter()
            .map(|&v| ManifoldPoint::new_unchecked(kind, vec![v]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(kind, height, width, pixels)
    }

    #[inline]
    pub fn kind(&self) -> ManifoldKind {
        self.kind
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
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> &ManifoldPoint<T> {
        &self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn pixels(&self) -> &[ManifoldPoint<T>] {
        &self.pixels
    }

    pub fn first_invalid_pixel(&self) -> Option<(usize, String)> {
        self.pixels
            .par_iter()
            .enumerate()
            .find_first(|(_, p)| p.validate().is_err())
            .map(|(i, p)| (i, p.validate().unwrap_err()))
    }
}

/// A real-valued field on the pixel grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    height: usize,
    width: usize,
    values: Vec<T>,
}

impl<T: Scalar> ScalarField<T> {
    pub fn new(height: usize, width: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != height * width {
            return Err(invalid(format!(
                "{height}x{width} field needs {} values, got {}",
                height * width,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("scalar field contains non-finite values".into()));
        }
        Ok(Self { height, width, values })
    }

    pub fn filled(height: usize, width: usize, value: T) -> Self {
        Self {
            height,
            width,
            values: vec![value; height * width],
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
    pub fn get(&self, row: usize, col: usize) -> T {
        self.values[row * self.width + col]
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn map(&self, f: impl Fn(T) -> T + Sync + Send) -> Self {
        Self {
            height: self.height,
            width: self.width,
            values: self.values.par_iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn min_max(&self) -> (T, T) {
        self.values
            .iter()
            .fold((self.values[0], self.values[0]), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

/// The 2x2 Gram matrix of the directional derivatives at a pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureTensor<T> {
    pub a11: T,
    pub a12: T,
    pub a22: T,
}

impl<T: Scalar> StructureTensor<T> {
    pub fn zero() -> Self {
        Self {
            a11: T::zero(),
            a12: T::zero(),
            a22: T::zero(),
        }
    }

    /// Largest eigenvalue (equivalently singular value, the matrix being
    /// symmetric PSD) in closed form.
    pub fn lambda_max(&self) -> T {
        let t = self.a11 + self.a22;
        let det = (self.a11 * self.a22 - self.a12 * self.a12).max(T::zero());
        let disc = (t * t - T::lit(4.0) * det).max(T::zero());
        ((t + disc.sqrt()) * T::lit(0.5)).max(T::zero())
    }

    /// `sqrt(lambda_max)`: the largest rate of change over unit directions.
    pub fn gradient_magnitude(&self) -> T {
        self.lambda_max().sqrt()
    }
}

fn one_sided_difference<T: Scalar>(
    img: &ManifoldImage<T>,
    row: usize,
    col: usize,
    along_rows: bool,
) -> Result<TangentVector<T>> {
    if row >= img.height || col >= img.width {
        return Err(invalid(format!("pixel ({row}, {col}) outside image")));
    }
    let here = img.get(row, col);
    let (idx, extent) = if along_rows {
        (row, img.height)
    } else {
        (col, img.width)
    };
    let at = |i: usize| if along_rows { img.get(i, col) } else { img.get(row, i) };
    if extent == 1 {
        return Ok(TangentVector::zero(here.clone()));
    }
    if idx + 1 < extent {
        log_map(here, at(idx + 1))
    } else {
        // last row/column: negated backward difference
        let back = log_map(here, at(idx - 1))?;
        Ok(back.scaled(-T::one()))
    }
}

/// `I_x(p, q) ~ Log_{I(p,q)} I(p+1, q)`, with a negated backward difference
/// on the last row.
pub fn finite_difference_x<T: Scalar>(img: &ManifoldImage<T>, row: usize, col: usize) -> Result<TangentVector<T>> {
    one_sided_difference(img, row, col, true)
}

/// `I_y(p, q) ~ Log_{I(p,q)} I(p, q+1)`, with a negated backward difference
/// on the last column.
pub fn finite_difference_y<T: Scalar>(img: &ManifoldImage<T>, row: usize, col: usize) -> Result<TangentVector<T>> {
    one_sided_difference(img, row, col, false)
}

/// Structure tensor and the number of derivatives (0..=2) that hit the cut
/// locus and were replaced by zero.
fn tensor_with_flags<T: Scalar>(img: &ManifoldImage<T>, row: usize, col: usize) -> (StructureTensor<T>, usize) {
    let base = img.get(row, col);
    let mut flagged = 0;
    let mut diff = |res: Result<TangentVector<T>>| match res {
        Ok(v) => v.data().to_vec(),
        Err(_) => {
            flagged += 1;
            vec![T::zero(); base.kind().tangent_len()]
        }
    };
    let ix = diff(finite_difference_x(img, row, col));
    let iy = diff(finite_difference_y(img, row, col));
    let (a11, a12, a22) = geometry::gram2(base, &ix, &iy);
    (StructureTensor { a11, a12, a22 }, flagged)
}

/// Structure tensor at a pixel; derivatives in the cut locus count as zero.
pub fn structure_tensor<T: Scalar>(img: &ManifoldImage<T>, row: usize, col: usize) -> StructureTensor<T> {
    tensor_with_flags(img, row, col).0
}

/// Gradient magnitude field together with the number of pixels whose
/// derivatives had to be zeroed.
#[derive(Debug, Clone)]
pub struct GradientField<T> {
    pub magnitude: ScalarField<T>,
    pub cut_locus_pixels: usize,
}

pub fn gradient_field<T: Scalar>(img: &ManifoldImage<T>) -> GradientField<T> {
    let w = img.width;
    let per_pixel: Vec<(T, usize)> = (0..img.len())
        .into_par_iter()
        .map(|i| {
            let (st, flagged) = tensor_with_flags(img, i / w, i % w);
            let g = st.gradient_magnitude();
            (if g.is_finite() { g } else { T::zero() }, flagged)
        })
        .collect();
    let cut_locus_pixels = per_pixel.iter().filter(|(_, f)| *f > 0).count();
    GradientField {
        magnitude: ScalarField {
            height: img.height,
            width: w,
            values: per_pixel.into_iter().map(|(g, _)| g).collect(),
        },
        cut_locus_pixels,
    }
}

/// Manifold gradient magnitude `sqrt(lambda_max(A_pq))` at every pixel.
pub fn gradient_magnitude<T: Scalar>(img: &ManifoldImage<T>) -> ScalarField<T> {
    gradient_field(img).magnitude
}

/// Edge-stopping function `g = 1 / (1 + grad)`.
pub fn stopping_function<T: Scalar>(grad: &ScalarField<T>) -> ScalarField<T> {
    grad.map(|d| T::one() / (T::one() + d.max(T::zero())))
}
