//! Region-based (Chan-Vese) contours with intrinsic region means.
//!
//! The energy
//!
//! ```text
//! E = mu * Length + nu * Area(inside)
//!   + lambda1 * sum_inside d(I, m1)^2 + lambda2 * sum_outside d(I, m2)^2
//! ```
//!
//! is decreased by the flow
//! `phi_t = delta_eps(phi) [mu kappa + nu + lambda1 d1^2 - lambda2 d2^2]`,
//! which is its gradient descent under the `phi < 0` inside convention.

use rayon::prelude::*;

use super::{check_finite, ConvergenceMonitor, EnergyRecord, EnergyTerms, Observer, SegmentationResult, Warnings};
use crate::error::{invalid, Error, Result};
use crate::geometry::spd::Whitening;
use crate::geometry::{
    intrinsic_mean_from, squared_distance, ManifoldKind, ManifoldPoint, MeanError, MeanSolverParams,
};
use crate::image::ManifoldImage;
use crate::levelset::{curvature_at, dirac, extract_mask, reinitialize, DiracParams, LevelSetField, Mask};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChanVeseParams<T> {
    pub lambda1: T,
    pub lambda2: T,
    /// Length weight; `None` picks `0.1 *` the dynamic range of the squared
    /// distances seen at the first mean update.
    pub mu: Option<T>,
    pub nu: T,
    pub dt: T,
    pub max_iters: usize,
    pub mean_update_every: usize,
    pub reinit_every: usize,
    pub reinit_iters: usize,
    pub convergence_tol: T,
    pub convergence_window: usize,
    pub dirac: DiracParams<T>,
    pub mean_params: MeanSolverParams<T>,
}

impl<T: Scalar> Default for ChanVeseParams<T> {
    fn default() -> Self {
        Self {
            lambda1: T::one(),
            lambda2: T::one(),
            mu: None,
            nu: T::zero(),
            dt: T::lit(0.5),
            max_iters: 500,
            mean_update_every: 1,
            reinit_every: 25,
            reinit_iters: 10,
            convergence_tol: T::lit(1e-4),
            convergence_window: 10,
            dirac: DiracParams::default(),
            mean_params: MeanSolverParams::default(),
        }
    }
}

impl<T: Scalar> ChanVeseParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda1 > T::zero() && self.lambda2 > T::zero()) {
            return Err(invalid("lambda1 and lambda2 must be > 0"));
        }
        if let Some(mu) = self.mu {
            if !(mu >= T::zero()) {
                return Err(invalid("mu must be >= 0"));
            }
        }
        if !self.nu.is_finite() {
            return Err(invalid("nu must be finite"));
        }
        if !(self.dt > T::zero()) {
            return Err(invalid("dt must be > 0"));
        }
        if self.max_iters == 0 || self.mean_update_every == 0 {
            return Err(invalid("max_iters and mean_update_every must be >= 1"));
        }
        self.dirac.validate()?;
        self.mean_params.validate()
    }
}

/// Substitute squared distance for pixels in the cut locus of a mean: the
/// square of the largest geodesic distance on the compact manifolds.
fn cut_locus_dist_sq<T: Scalar>() -> T {
    T::pi() * T::pi()
}

/// Squared distances from every pixel to `mean`, and the number of pixels
/// that fell in the cut locus.
pub fn distance_fields<T: Scalar>(img: &ManifoldImage<T>, mean: &ManifoldPoint<T>) -> Result<(Vec<T>, usize)> {
    if mean.kind() != img.kind() {
        return Err(invalid("mean and image lie on different manifolds"));
    }
    let per_pixel: Vec<Result<Option<T>>> = match img.kind() {
        ManifoldKind::Spd(n) => {
            let w = Whitening::new(n, mean.data())?;
            img.pixels().par_iter().map(|p| w.dist_sq(p.data()).map(Some)).collect()
        }
        _ => img
            .pixels()
            .par_iter()
            .map(|p| match squared_distance(mean, p) {
                Ok(d) => Ok(Some(d)),
                Err(Error::CutLocus(_)) => Ok(None),
                Err(e) => Err(e),
            })
            .collect(),
    };
    let mut out = Vec::with_capacity(per_pixel.len());
    let mut flagged = 0;
    for d in per_pixel {
        match d? {
            Some(v) => out.push(v),
            None => {
                flagged += 1;
                out.push(cut_locus_dist_sq());
            }
        }
    }
    Ok((out, flagged))
}

/// Data term of the flow, `lambda1 d1^2 - lambda2 d2^2`: negative where a
/// pixel is better explained by the inside mean.
#[inline]
pub fn data_speed<T: Scalar>(d1_sq: T, d2_sq: T, lambda1: T, lambda2: T) -> T {
    lambda1 * d1_sq - lambda2 * d2_sq
}

/// Redistancing sweeps applied before measuring length, so the length term
/// depends on the contour rather than on the profile of `phi` around it.
const LENGTH_REDISTANCE_ITERS: usize = 10;

fn energy_from_fields<T: Scalar>(
    phi: &LevelSetField<T>,
    d1: &[T],
    d2: &[T],
    mu: T,
    params: &ChanVeseParams<T>,
) -> EnergyTerms<T> {
    let w = phi.width();
    let eps = params.dirac.epsilon;
    let sdf = reinitialize(phi, LENGTH_REDISTANCE_ITERS);
    let mut length = T::zero();
    let mut area = T::zero();
    let mut data_in = T::zero();
    let mut data_out = T::zero();
    for (i, &v) in phi.values().iter().enumerate() {
        let (px, py) = sdf.central(i / w, i % w);
        length += dirac(sdf.values()[i], eps) * (px * px + py * py).sqrt();
        if v < T::zero() {
            area += T::one();
            data_in += d1[i];
        } else {
            data_out += d2[i];
        }
    }
    let terms = EnergyTerms {
        length: mu * length,
        area: params.nu * area,
        data_in: params.lambda1 * data_in,
        data_out: params.lambda2 * data_out,
        total: T::zero(),
    };
    EnergyTerms {
        total: terms.length + terms.area + terms.data_in + terms.data_out,
        ..terms
    }
}

/// Discrete energy of `phi` for the given region means. Length is
/// `sum delta_eps(psi) |grad psi|` with `psi` a redistanced copy of `phi`;
/// area counts pixels with `phi < 0`.
pub fn compute_energy<T: Scalar>(
    img: &ManifoldImage<T>,
    phi: &LevelSetField<T>,
    mean_inside: &ManifoldPoint<T>,
    mean_outside: &ManifoldPoint<T>,
    mu: T,
    params: &ChanVeseParams<T>,
) -> Result<EnergyTerms<T>> {
    if img.height() != phi.height() || img.width() != phi.width() {
        return Err(invalid("image and level set dimensions differ"));
    }
    let (d1, _) = distance_fields(img, mean_inside)?;
    let (d2, _) = distance_fields(img, mean_outside)?;
    Ok(energy_from_fields(phi, &d1, &d2, mu, params))
}

pub fn segment_chan_vese<T: Scalar>(
    img: &ManifoldImage<T>,
    phi0: &LevelSetField<T>,
    params: &ChanVeseParams<T>,
) -> Result<SegmentationResult<T>> {
    segment_chan_vese_with_observer(img, phi0, params, &mut |_, _| {})
}

struct RegionMeans<T: Scalar> {
    inside: Option<ManifoldPoint<T>>,
    outside: Option<ManifoldPoint<T>>,
    mask: Option<Mask>,
}

impl<T: Scalar> RegionMeans<T> {
    /// Recomputes a region mean, warm-starting from the previous one.
    fn solve(
        img: &ManifoldImage<T>,
        mask: &Mask,
        want_inside: bool,
        previous: Option<&ManifoldPoint<T>>,
        params: &MeanSolverParams<T>,
        warnings: &mut Warnings,
    ) -> Result<Option<ManifoldPoint<T>>> {
        let points: Vec<&ManifoldPoint<T>> = img
            .pixels()
            .iter()
            .zip(mask.data())
            .filter(|(_, &m)| m == want_inside)
            .map(|(p, _)| p)
            .collect();
        if points.is_empty() {
            warnings.empty_region += 1;
            return Ok(previous.cloned());
        }
        let init = previous.cloned().unwrap_or_else(|| points[0].clone());
        match intrinsic_mean_from(&points, init, params) {
            Ok(m) => Ok(Some(m)),
            Err(MeanError::NonConvergence { last, .. }) => {
                warnings.mean_non_convergence += 1;
                Ok(Some(last))
            }
            Err(MeanError::Failed { iteration, source }) => {
                warnings.mean_non_convergence += 1;
                match previous {
                    Some(p) => Ok(Some(p.clone())),
                    None => Err(Error::MeanIteration {
                        iteration,
                        source: Box::new(source),
                    }),
                }
            }
        }
    }
}

/// Chan-Vese evolution with intrinsic means recomputed every
/// `mean_update_every` iterations.
pub fn segment_chan_vese_with_observer<T: Scalar>(
    img: &ManifoldImage<T>,
    phi0: &LevelSetField<T>,
    params: &ChanVeseParams<T>,
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
    let initial_mask = extract_mask(phi0);
    let area = initial_mask.area();
    if area == 0 || area == initial_mask.data().len() {
        return Err(invalid("initial contour must leave both regions non-empty"));
    }

    let (h, w) = (phi0.height(), phi0.width());
    let eps = params.dirac.epsilon;
    let mut warnings = Warnings::default();
    let mut means = RegionMeans {
        inside: None,
        outside: None,
        mask: None,
    };
    let mut d1: Vec<T> = Vec::new();
    let mut d2: Vec<T> = Vec::new();
    let mut mu: Option<T> = params.mu;

    let mut phi = phi0.clone();
    let mut trace = Vec::new();
    let mut monitor = ConvergenceMonitor::new(&phi, params.convergence_tol.as_f64(), params.convergence_window);
    let mut converged = false;
    let mut iterations = 0;

    let update_means = |phi: &LevelSetField<T>,
                        means: &mut RegionMeans<T>,
                        d1: &mut Vec<T>,
                        d2: &mut Vec<T>,
                        warnings: &mut Warnings|
     -> Result<()> {
        let mask = extract_mask(phi);
        if means.mask.as_ref() == Some(&mask) {
            return Ok(());
        }
        let inside = RegionMeans::solve(img, &mask, true, means.inside.as_ref(), &params.mean_params, warnings)?;
        let outside = RegionMeans::solve(img, &mask, false, means.outside.as_ref(), &params.mean_params, warnings)?;
        let (inside, outside) = match (inside, outside) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(invalid("a region became empty before its mean was known")),
        };
        let (f1, c1) = distance_fields(img, &inside)?;
        let (f2, c2) = distance_fields(img, &outside)?;
        warnings.cut_locus += c1 + c2;
        *d1 = f1;
        *d2 = f2;
        means.inside = Some(inside);
        means.outside = Some(outside);
        means.mask = Some(mask);
        Ok(())
    };

    for it in 0..params.max_iters {
        if it % params.mean_update_every == 0 {
            update_means(&phi, &mut means, &mut d1, &mut d2, &mut warnings)?;
            let weight = *mu.get_or_insert_with(|| auto_length_weight(&d1, &d2));
            trace.push(EnergyRecord {
                iteration: it,
                terms: energy_from_fields(&phi, &d1, &d2, weight, params),
            });
        }
        let weight = mu.expect("length weight resolved at first mean update");

        let next: Vec<T> = (0..h * w)
            .into_par_iter()
            .map(|i| {
                let v = phi.values()[i];
                let kappa = curvature_at(&phi, i / w, i % w);
                let force = weight * kappa + params.nu + data_speed(d1[i], d2[i], params.lambda1, params.lambda2);
                v + params.dt * dirac(v, eps) * force
            })
            .collect();
        let step = it + 1;
        check_finite(&next, step)?;
        phi = LevelSetField::from_vec_unchecked(h, w, next);
        if params.reinit_every > 0 && step % params.reinit_every == 0 {
            phi = reinitialize(&phi, params.reinit_iters);
        }
        iterations = step;
        observer(step, &phi);
        if monitor.update(step, &phi) {
            converged = true;
            break;
        }
    }

    update_means(&phi, &mut means, &mut d1, &mut d2, &mut warnings)?;
    let weight = mu.unwrap_or_else(|| auto_length_weight(&d1, &d2));
    trace.push(EnergyRecord {
        iteration: iterations,
        terms: energy_from_fields(&phi, &d1, &d2, weight, params),
    });

    let mask = extract_mask(&phi);
    Ok(SegmentationResult {
        phi,
        mask,
        energy_trace: trace,
        iterations,
        converged,
        mean_inside: means.inside,
        mean_outside: means.outside,
        length_weight: weight,
        warnings,
    })
}

/// `0.1 * (max - min)` over both squared-distance fields.
fn auto_length_weight<T: Scalar>(d1: &[T], d2: &[T]) -> T {
    let mut lo = d1[0];
    let mut hi = d1[0];
    for &v in d1.iter().chain(d2) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    T::lit(0.1) * (hi - lo)
}
