//! Level-set machinery shared by the contour solvers.
//!
//! A contour is the zero set of `phi`, with `phi < 0` inside and `phi > 0`
//! outside. Grid spacing is one pixel. Outside the grid, `phi` is extended by
//! linear extrapolation, so planar fields have exact one-sided and central
//! differences up to the border.

use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::image::ScalarField;
use crate::scalar::Scalar;

/// Floor on `|grad phi|` inside `div(grad phi / |grad phi|)`.
pub const GRADIENT_FLOOR: f64 = 1e-8;
/// Pseudo-time step of the reinitialization PDE.
pub const REINIT_DT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetField<T> {
    height: usize,
    width: usize,
    phi: Vec<T>,
}

impl<T: Scalar> LevelSetField<T> {
    pub fn new(height: usize, width: usize, phi: Vec<T>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(invalid("level set dimensions must be positive"));
        }
        if phi.len() != height * width {
            return Err(invalid(format!(
                "{height}x{width} level set needs {} values, got {}",
                height * width,
                phi.len()
            )));
        }
        if phi.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("level set contains non-finite values".into()));
        }
        Ok(Self { height, width, phi })
    }

    pub(crate) fn from_vec_unchecked(height: usize, width: usize, phi: Vec<T>) -> Self {
        debug_assert_eq!(phi.len(), height * width);
        Self { height, width, phi }
    }

    pub fn from_fn(height: usize, width: usize, f: impl Fn(usize, usize) -> T + Sync) -> Result<Self> {
        let phi = (0..height * width)
            .into_par_iter()
            .map(|i| f(i / width, i % width))
            .collect();
        Self::new(height, width, phi)
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
        self.phi[row * self.width + col]
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.phi
    }

    pub fn negated(&self) -> Self {
        Self {
            height: self.height,
            width: self.width,
            phi: self.phi.iter().map(|&v| -v).collect(),
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            height: self.height,
            width: self.width,
            phi: self.phi.iter().map(|&v| v * s).collect(),
        }
    }

    /// Value at a possibly out-of-range index one step beyond the border,
    /// extended linearly.
    #[inline]
    pub(crate) fn sample(&self, row: isize, col: isize) -> T {
        let h = self.height as isize;
        let w = self.width as isize;
        if row < 0 || row >= h {
            if h < 2 {
                return self.sample(row.clamp(0, h - 1), col);
            }
            let (edge, inner) = if row < 0 { (0, 1) } else { (h - 1, h - 2) };
            return self.sample(edge, col) * T::lit(2.0) - self.sample(inner, col);
        }
        if col < 0 || col >= w {
            if w < 2 {
                return self.sample(row, col.clamp(0, w - 1));
            }
            let (edge, inner) = if col < 0 { (0, 1) } else { (w - 1, w - 2) };
            return self.sample(row, edge) * T::lit(2.0) - self.sample(row, inner);
        }
        self.phi[(row * w + col) as usize]
    }

    /// One-sided differences `(D-x, D+x, D-y, D+y)` at a pixel, where x runs
    /// along columns and y along rows.
    #[inline]
    pub(crate) fn one_sided(&self, row: usize, col: usize) -> [T; 4] {
        let (r, c) = (row as isize, col as isize);
        let v = self.sample(r, c);
        [
            v - self.sample(r, c - 1),
            self.sample(r, c + 1) - v,
            v - self.sample(r - 1, c),
            self.sample(r + 1, c) - v,
        ]
    }

    /// Central first derivatives `(phi_x, phi_y)`.
    #[inline]
    pub(crate) fn central(&self, row: usize, col: usize) -> (T, T) {
        let (r, c) = (row as isize, col as isize);
        let half = T::lit(0.5);
        (
            (self.sample(r, c + 1) - self.sample(r, c - 1)) * half,
            (self.sample(r + 1, c) - self.sample(r - 1, c)) * half,
        )
    }
}

/// Binary segmentation: `true` marks the contour interior.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    height: usize,
    width: usize,
    data: Vec<bool>,
}

impl Mask {
    pub fn new(height: usize, width: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != height * width {
            return Err(invalid("mask size does not match dimensions"));
        }
        Ok(Self { height, width, data })
    }

    pub fn from_fn(height: usize, width: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let data = (0..height * width).map(|i| f(i / width, i % width)).collect();
        Self { height, width, data }
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
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn area(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> Self {
        Self {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|b| !b).collect(),
        }
    }

    /// Number of pixels on which the two masks disagree.
    pub fn hamming(&self, other: &Mask) -> usize {
        self.data.iter().zip(&other.data).filter(|(a, b)| a != b).count()
    }

    /// Dice overlap `2|A & B| / (|A| + |B|)`; two empty masks score 1.
    pub fn dice(&self, other: &Mask) -> f64 {
        assert_eq!(self.data.len(), other.data.len(), "mask sizes differ");
        let inter = self.data.iter().zip(&other.data).filter(|(a, b)| **a && **b).count();
        let total = self.area() + other.area();
        if total == 0 {
            1.0
        } else {
            2.0 * inter as f64 / total as f64
        }
    }
}

/// Initial contour shapes, in pixel coordinates with `x` = column and
/// `y` = row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape<T> {
    Circle { cx: T, cy: T, r: T },
    Rect { x0: T, y0: T, x1: T, y1: T },
}

impl<T: Scalar> Shape<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Shape::Circle { r, .. } if !(r > T::zero()) => Err(invalid("circle radius must be > 0")),
            Shape::Rect { x0, y0, x1, y1 } if !(x1 > x0 && y1 > y0) => {
                Err(invalid("rectangle must have x1 > x0 and y1 > y0"))
            }
            _ => Ok(()),
        }
    }

    /// Checks that the shape lies strictly inside a `height x width` grid.
    pub fn check_inside(&self, height: usize, width: usize) -> Result<()> {
        let (xmax, ymax) = (T::from_count(width) - T::one(), T::from_count(height) - T::one());
        let (lo_x, lo_y, hi_x, hi_y) = match *self {
            Shape::Circle { cx, cy, r } => (cx - r, cy - r, cx + r, cy + r),
            Shape::Rect { x0, y0, x1, y1 } => (x0, y0, x1, y1),
        };
        if lo_x > T::zero() && lo_y > T::zero() && hi_x < xmax && hi_y < ymax {
            Ok(())
        } else {
            Err(invalid(format!(
                "shape does not lie strictly inside the {height}x{width} grid"
            )))
        }
    }

    /// Signed distance from pixel center `(x, y)` to the shape boundary,
    /// negative inside.
    pub fn signed_distance(&self, x: T, y: T) -> T {
        match *self {
            Shape::Circle { cx, cy, r } => ((x - cx) * (x - cx) + (y - cy) * (y - cy)).sqrt() - r,
            Shape::Rect { x0, y0, x1, y1 } => {
                let half = T::lit(0.5);
                let (mx, my) = ((x0 + x1) * half, (y0 + y1) * half);
                let (hx, hy) = ((x1 - x0) * half, (y1 - y0) * half);
                let qx = (x - mx).abs() - hx;
                let qy = (y - my).abs() - hy;
                let ox = qx.max(T::zero());
                let oy = qy.max(T::zero());
                (ox * ox + oy * oy).sqrt() + qx.max(qy).min(T::zero())
            }
        }
    }

    pub fn contains(&self, x: T, y: T) -> bool {
        self.signed_distance(x, y) < T::zero()
    }
}

impl<T: Scalar> FromStr for Shape<T> {
    type Err = Error;

    /// Parses `circle:cx,cy,r` or `rect:x0,y0,x1,y1`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = s
            .split_once(':')
            .ok_or_else(|| invalid(format!("shape `{s}` must look like circle:cx,cy,r or rect:x0,y0,x1,y1")))?;
        let nums = args
            .split(',')
            .map(|a| a.trim().parse::<f64>().map(T::lit))
            .collect::<std::result::Result<Vec<T>, _>>()
            .map_err(|_| invalid(format!("bad number in shape `{s}`")))?;
        let shape = match (name.trim().to_ascii_lowercase().as_str(), nums.as_slice()) {
            ("circle", &[cx, cy, r]) => Shape::Circle { cx, cy, r },
            ("rect", &[x0, y0, x1, y1]) => Shape::Rect { x0, y0, x1, y1 },
            _ => return Err(invalid(format!("cannot parse shape `{s}`"))),
        };
        shape.validate()?;
        Ok(shape)
    }
}

/// Signed distance field of `shape` on a `height x width` grid.
pub fn init_shape<T: Scalar>(height: usize, width: usize, shape: &Shape<T>) -> Result<LevelSetField<T>> {
    shape.validate()?;
    shape.check_inside(height, width)?;
    LevelSetField::from_fn(height, width, |r, c| {
        shape.signed_distance(T::from_count(c), T::from_count(r))
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracParams<T> {
    pub epsilon: T,
}

impl<T: Scalar> Default for DiracParams<T> {
    fn default() -> Self {
        Self { epsilon: T::lit(1.5) }
    }
}

impl<T: Scalar> DiracParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > T::zero()) {
            return Err(invalid("dirac epsilon must be > 0"));
        }
        Ok(())
    }
}

/// Smoothed Dirac delta `eps / (pi (eps^2 + phi^2))`.
#[inline]
pub fn dirac<T: Scalar>(phi: T, eps: T) -> T {
    eps / (T::pi() * (eps * eps + phi * phi))
}

pub fn dirac_eps<T: Scalar>(phi: &LevelSetField<T>, params: &DiracParams<T>) -> ScalarField<T> {
    let eps = params.epsilon;
    let values = phi.phi.par_iter().map(|&v| dirac(v, eps)).collect();
    ScalarField::new(phi.height, phi.width, values).expect("dirac of finite field is finite")
}

/// `div(grad phi / |grad phi|)` at one pixel: central differences of the unit
/// normal evaluated on the four half-pixel faces. Each face flux has
/// magnitude at most one, so `|kappa| <= 4` even at isolated extrema.
#[inline]
pub(crate) fn curvature_at<T: Scalar>(phi: &LevelSetField<T>, row: usize, col: usize) -> T {
    let (r, c) = (row as isize, col as isize);
    let s = |dr: isize, dc: isize| phi.sample(r + dr, c + dc);
    let quarter = T::lit(0.25);
    let floor = T::lit(GRADIENT_FLOOR);
    let unit = |along: T, across: T| along / (along * along + across * across).sqrt().max(floor);
    // Face (r, c + 1/2) and its mirror (r, c - 1/2).
    let east = unit(s(0, 1) - s(0, 0), (s(1, 0) - s(-1, 0) + s(1, 1) - s(-1, 1)) * quarter);
    let west = unit(
        s(0, 0) - s(0, -1),
        (s(1, -1) - s(-1, -1) + s(1, 0) - s(-1, 0)) * quarter,
    );
    let south = unit(s(1, 0) - s(0, 0), (s(0, 1) - s(0, -1) + s(1, 1) - s(1, -1)) * quarter);
    let north = unit(
        s(0, 0) - s(-1, 0),
        (s(-1, 1) - s(-1, -1) + s(0, 1) - s(0, -1)) * quarter,
    );
    east - west + south - north
}

/// Mean curvature `div(grad phi / |grad phi|)` of every level set.
pub fn curvature_divergence<T: Scalar>(phi: &LevelSetField<T>) -> ScalarField<T> {
    let w = phi.width;
    let values = (0..phi.phi.len())
        .into_par_iter()
        .map(|i| curvature_at(phi, i / w, i % w))
        .collect();
    ScalarField::new(phi.height, w, values).expect("curvature of finite field is finite")
}

/// Central-difference gradient norm.
pub fn gradient_norm<T: Scalar>(phi: &LevelSetField<T>) -> ScalarField<T> {
    let w = phi.width;
    let values = (0..phi.phi.len())
        .into_par_iter()
        .map(|i| {
            let (px, py) = phi.central(i / w, i % w);
            (px * px + py * py).sqrt()
        })
        .collect();
    ScalarField::new(phi.height, w, values).expect("finite")
}

/// Fraction of pixels with `|phi| < band` whose gradient norm is within `tol`
/// of one. Returns 1 for an empty band.
pub fn unit_gradient_fraction<T: Scalar>(phi: &LevelSetField<T>, band: T, tol: T) -> f64 {
    let g = gradient_norm(phi);
    let (mut inside, mut good) = (0usize, 0usize);
    for (&v, &n) in phi.phi.iter().zip(g.values()) {
        if v.abs() < band {
            inside += 1;
            if (n - T::one()).abs() <= tol {
                good += 1;
            }
        }
    }
    if inside == 0 {
        1.0
    } else {
        good as f64 / inside as f64
    }
}

/// Godunov upwind approximation of `|grad phi|` for a front moving with a
/// speed of sign `sign` along the outward normal.
#[inline]
pub(crate) fn godunov_norm<T: Scalar>(d: [T; 4], sign: T) -> T {
    let z = T::zero();
    let [dxm, dxp, dym, dyp] = d;
    let (gx, gy) = if sign > z {
        (
            dxm.max(z).powi(2).max(dxp.min(z).powi(2)),
            dym.max(z).powi(2).max(dyp.min(z).powi(2)),
        )
    } else {
        (
            dxm.min(z).powi(2).max(dxp.max(z).powi(2)),
            dym.min(z).powi(2).max(dyp.max(z).powi(2)),
        )
    };
    (gx + gy).sqrt()
}

/// Redistances `phi` toward a signed distance function by `iters` explicit
/// steps of `phi_t = S(phi0) (1 - |grad phi|)` with upwind gradients and the
/// smoothed sign `S = phi0 / sqrt(phi0^2 + |grad phi0|^2)`.
///
/// Pixels with a neighbour of opposite sign instead relax toward their
/// estimated distance `phi0 / |grad phi0|` (Russo-Smereka subcell fix), so
/// the zero level set stays put and no pixel changes sign.
pub fn reinitialize<T: Scalar>(phi: &LevelSetField<T>, iters: usize) -> LevelSetField<T> {
    let (h, w) = (phi.height, phi.width);
    let dt = T::lit(REINIT_DT);
    let floor = T::lit(GRADIENT_FLOOR);
    let setup: Vec<(T, Option<T>)> = (0..h * w)
        .into_par_iter()
        .map(|i| {
            let (r, c) = (i / w, i % w);
            let p = phi.phi[i];
            let [dxm, dxp, dym, dyp] = phi.one_sided(r, c);
            let (px, py) = phi.central(r, c);
            let central = (px * px + py * py).sqrt();
            let sign = p / (p * p + (central * central).max(T::lit(1e-4))).sqrt();
            let crosses = [dxm, dxp, dym, dyp]
                .iter()
                .zip([-T::one(), T::one(), -T::one(), T::one()])
                .any(|(&d, dir)| {
                    let q = p + dir * d;
                    (p < T::zero()) != (q < T::zero())
                });
            let anchor = if crosses && p != T::zero() {
                let fwd = (dxp * dxp + dyp * dyp).sqrt();
                let back = (dxm * dxm + dym * dym).sqrt();
                Some(p / central.max(fwd).max(back).max(floor))
            } else {
                None
            };
            (sign, anchor)
        })
        .collect();
    let mut cur = phi.clone();
    for _ in 0..iters {
        let next: Vec<T> = (0..h * w)
            .into_par_iter()
            .map(|i| {
                let (s, anchor) = setup[i];
                let v = cur.phi[i];
                if let Some(d) = anchor {
                    let sgn = if d < T::zero() { -T::one() } else { T::one() };
                    return v - dt * (sgn * v.abs() - d);
                }
                if s == T::zero() {
                    return v;
                }
                let grad = godunov_norm(cur.one_sided(i / w, i % w), s);
                v - dt * s * (grad - T::one())
            })
            .collect();
        cur.phi = next;
    }
    cur
}

/// Interior mask `phi < 0`.
pub fn extract_mask<T: Scalar>(phi: &LevelSetField<T>) -> Mask {
    Mask {
        height: phi.height,
        width: phi.width,
        data: phi.phi.iter().map(|&v| v < T::zero()).collect(),
    }
}

#[cfg(test)]
mod tests;
