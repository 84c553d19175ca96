//! Geodesic active contours driven by the manifold gradient magnitude.

use rayon::prelude::*;

use super::{check_finite, ConvergenceMonitor, EnergyRecord, EnergyTerms, Observer, SegmentationResult, Warnings};
use crate::error::{invalid, Error, Result};
use crate::image::{gradient_field, stopping_function, ManifoldImage, ScalarField};
use crate::levelset::{curvature_at, dirac, extract_mask, godunov_norm, reinitialize, DiracParams, LevelSetField};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GacParams<T> {
    pub dt: T,
    pub max_iters: usize,
    /// Mask change rate (pixels per pixel per iteration) counted as stable.
    pub convergence_tol: T,
    pub convergence_window: usize,
    pub reinit_every: usize,
    pub reinit_iters: usize,
    /// Constant speed along the outward normal, scaled by `g`: positive
    /// inflates the contour, negative shrinks it, zero disables the term.
    pub balloon: T,
    /// Smoothing width used when reporting the weighted contour length.
    pub dirac: DiracParams<T>,
}

impl<T: Scalar> Default for GacParams<T> {
    fn default() -> Self {
        Self {
            dt: T::lit(0.2),
            max_iters: 2000,
            convergence_tol: T::lit(1e-4),
            convergence_window: 10,
            reinit_every: 25,
            reinit_iters: 10,
            balloon: T::zero(),
            dirac: DiracParams::default(),
        }
    }
}

impl<T: Scalar> GacParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero() && self.dt <= T::lit(0.5)) {
            return Err(invalid("GAC dt must lie in (0, 0.5]"));
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be >= 1"));
        }
        if !self.balloon.is_finite() || !(self.convergence_tol >= T::zero()) {
            return Err(invalid("balloon and convergence_tol must be finite, tol >= 0"));
        }
        self.dirac.validate()
    }
}

/// Larger-magnitude one-sided difference when both agree in sign, zero at
/// an extremum. A single-pixel edge valley in `g` keeps its full depth
/// instead of being halved by a central difference.
fn maxmod<T: Scalar>(back: T, fwd: T) -> T {
    if back * fwd <= T::zero() {
        if back == T::zero() {
            fwd
        } else if fwd == T::zero() {
            back
        } else {
            T::zero()
        }
    } else if back.abs() > fwd.abs() {
        back
    } else {
        fwd
    }
}

fn axis_slope<T: Scalar>(at: impl Fn(usize) -> T, i: usize, n: usize) -> T {
    if n < 2 {
        return T::zero();
    }
    let back = if i == 0 { T::zero() } else { at(i) - at(i - 1) };
    let fwd = if i + 1 == n { T::zero() } else { at(i + 1) - at(i) };
    maxmod(back, fwd)
}

/// Gradient of the stopping field at a pixel, `(d/dcol, d/drow)`.
fn stopping_gradient<T: Scalar>(g: &ScalarField<T>, row: usize, col: usize) -> (T, T) {
    let gx = axis_slope(|c| g.get(row, c), col, g.width());
    let gy = axis_slope(|r| g.get(r, col), row, g.height());
    (gx, gy)
}

/// Central differences of `g`, one-sided at the border.
fn field_gradient<T: Scalar>(g: &ScalarField<T>, row: usize, col: usize) -> (T, T) {
    let (h, w) = (g.height(), g.width());
    let half = T::lit(0.5);
    let gx = if w < 2 {
        T::zero()
    } else if col == 0 {
        g.get(row, 1) - g.get(row, 0)
    } else if col + 1 == w {
        g.get(row, col) - g.get(row, col - 1)
    } else {
        (g.get(row, col + 1) - g.get(row, col - 1)) * half
    };
    let gy = if h < 2 {
        T::zero()
    } else if row == 0 {
        g.get(1, col) - g.get(0, col)
    } else if row + 1 == h {
        g.get(row, col) - g.get(row - 1, col)
    } else {
        (g.get(row + 1, col) - g.get(row - 1, col)) * half
    };
    (gx, gy)
}

/// Speed of `g |grad phi| div(grad phi / |grad phi|) + grad g . grad phi`.
///
/// With `upwind` the advection term uses one-sided differences chosen by the
/// sign of `grad g`; otherwise central differences.
pub fn gac_speed_expanded<T: Scalar>(
    phi: &LevelSetField<T>,
    g: &ScalarField<T>,
    upwind: bool,
) -> Result<ScalarField<T>> {
    let w = phi.width();
    let values = (0..phi.values().len())
        .into_par_iter()
        .map(|i| {
            let (r, c) = (i / w, i % w);
            let (px, py) = phi.central(r, c);
            let norm = (px * px + py * py).sqrt();
            let kappa = curvature_at(phi, r, c);
            let (gx, gy) = stopping_gradient(g, r, c);
            let advect = if upwind {
                let [dxm, dxp, dym, dyp] = phi.one_sided(r, c);
                let ax = if gx > T::zero() { dxp } else { dxm };
                let ay = if gy > T::zero() { dyp } else { dym };
                gx * ax + gy * ay
            } else {
                gx * px + gy * py
            };
            g.get(r, c) * kappa * norm + advect
        })
        .collect();
    ScalarField::new(phi.height(), w, values)
}

/// Speed of the compact form `|grad phi| div(g grad phi / |grad phi|)`,
/// taking the divergence of the flux by central differences.
pub fn gac_speed_compact<T: Scalar>(phi: &LevelSetField<T>, g: &ScalarField<T>) -> Result<ScalarField<T>> {
    let (h, w) = (phi.height(), phi.width());
    let floor = T::lit(crate::levelset::GRADIENT_FLOOR);
    let flux: Vec<(T, T)> = (0..h * w)
        .into_par_iter()
        .map(|i| {
            let (px, py) = phi.central(i / w, i % w);
            let n = (px * px + py * py).sqrt().max(floor);
            let gv = g.get(i / w, i % w);
            (gv * px / n, gv * py / n)
        })
        .collect();
    let fx = ScalarField::new(h, w, flux.iter().map(|f| f.0).collect())?;
    let fy = ScalarField::new(h, w, flux.iter().map(|f| f.1).collect())?;
    let values = (0..h * w)
        .into_par_iter()
        .map(|i| {
            let (r, c) = (i / w, i % w);
            let (px, py) = phi.central(r, c);
            let div = field_gradient(&fx, r, c).0 + field_gradient(&fy, r, c).1;
            (px * px + py * py).sqrt() * div
        })
        .collect();
    ScalarField::new(h, w, values)
}

fn weighted_length<T: Scalar>(phi: &LevelSetField<T>, g: &ScalarField<T>, eps: T) -> T {
    let w = phi.width();
    let parts: Vec<T> = (0..phi.values().len())
        .into_par_iter()
        .map(|i| {
            let (px, py) = phi.central(i / w, i % w);
            g.values()[i] * dirac(phi.values()[i], eps) * (px * px + py * py).sqrt()
        })
        .collect();
    parts.into_iter().fold(T::zero(), |a, b| a + b)
}

pub fn segment_gac<T: Scalar>(
    img: &ManifoldImage<T>,
    phi0: &LevelSetField<T>,
    params: &GacParams<T>,
) -> Result<SegmentationResult<T>> {
    segment_gac_with_observer(img, phi0, params, &mut |_, _| {})
}

/// Geodesic active contour evolution
/// `phi_t = g |grad phi| kappa + grad g . grad phi - balloon g |grad phi|`
/// with `g = 1 / (1 + gradient magnitude)` computed once.
pub fn segment_gac_with_observer<T: Scalar>(
    img: &ManifoldImage<T>,
    phi0: &LevelSetField<T>,
    params: &GacParams<T>,
    observer: Observer<'_, T>,
) -> Result<SegmentationResult<T>> {
    params.validate()?;
    if img.height() != phi0.height() || img.width() != phi0.width() {
        return Err(invalid(format!(
            "image is {}x{} but level set is {}x{}",
            img.height(),
            img.width(),
            phi0.height(),
            phi0.width()
        )));
    }
    let grad = gradient_field(img);
    let g = stopping_function(&grad.magnitude);
    let warnings = Warnings {
        cut_locus: grad.cut_locus_pixels,
        ..Warnings::default()
    };

    let (h, w) = (phi0.height(), phi0.width());
    let eps = params.dirac.epsilon;
    let record = |iteration, phi: &LevelSetField<T>| {
        let length = weighted_length(phi, &g, eps);
        EnergyRecord {
            iteration,
            terms: EnergyTerms {
                length,
                total: length,
                ..EnergyTerms::default()
            },
        }
    };

    let mut phi = phi0.clone();
    let mut trace = vec![record(0, &phi)];
    let mut monitor = ConvergenceMonitor::new(&phi, params.convergence_tol.as_f64(), params.convergence_window);
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=params.max_iters {
        let speed = gac_speed_expanded(&phi, &g, true).map_err(|_| Error::NumericalBlowup { iteration: it })?;
        let next: Vec<T> = (0..h * w)
            .into_par_iter()
            .map(|i| {
                let mut v = speed.values()[i];
                if params.balloon != T::zero() {
                    let d = phi.one_sided(i / w, i % w);
                    v -= params.balloon * g.values()[i] * godunov_norm(d, params.balloon);
                }
                phi.values()[i] + params.dt * v
            })
            .collect();
        check_finite(&next, it)?;
        phi = LevelSetField::from_vec_unchecked(h, w, next);
        if params.reinit_every > 0 && it % params.reinit_every == 0 {
            phi = reinitialize(&phi, params.reinit_iters);
        }
        iterations = it;
        observer(it, &phi);
        if it % monitor.window == 0 {
            trace.push(record(it, &phi));
        }
        if monitor.update(it, &phi) {
            converged = true;
            break;
        }
    }

    let mask = extract_mask(&phi);
    Ok(SegmentationResult {
        phi,
        mask,
        energy_trace: trace,
        iterations,
        converged,
        mean_inside: None,
        mean_outside: None,
        length_weight: T::zero(),
        warnings,
    })
}
