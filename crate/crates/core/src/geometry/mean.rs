//! Intrinsic (Karcher) mean by fixed-point tangent averaging.

use std::borrow::Borrow;
use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::spd::{self, Whitening};
use super::{exp_map, log_map, riemannian_norm, ManifoldKind, ManifoldPoint, TangentVector};
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Points per parallel work unit. Partial sums are combined in chunk order,
/// so results do not depend on the number of worker threads.
const CHUNK: usize = 64;

/// Smallest step fraction tried before a non-decreasing sweep is accepted.
const MIN_STEP: f64 = 1.0 / 1024.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSolverParams<T> {
    /// Stop once the Riemannian norm of the mean tangent drops to this value.
    pub tolerance: T,
    pub max_iters: usize,
}

impl<T: Scalar> Default for MeanSolverParams<T> {
    fn default() -> Self {
        Self {
            tolerance: T::lit(1e-8),
            max_iters: 100,
        }
    }
}

impl<T: Scalar> MeanSolverParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > T::zero()) {
            return Err(invalid("mean tolerance must be > 0"));
        }
        if self.max_iters == 0 {
            return Err(invalid("mean max_iters must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug)]
pub enum MeanError<T> {
    /// The iteration cap was reached; `last` is the final iterate.
    NonConvergence {
        last: ManifoldPoint<T>,
        iterations: usize,
        residual: T,
    },
    /// A geometric operation failed (e.g. a point in the cut locus).
    Failed { iteration: usize, source: Error },
}

impl<T: fmt::Display> fmt::Display for MeanError<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeanError::NonConvergence {
                iterations, residual, ..
            } => write!(
                f,
                "intrinsic mean did not converge after {iterations} iterations (residual {residual})"
            ),
            MeanError::Failed { iteration, source } => {
                write!(f, "intrinsic mean failed at iteration {iteration}: {source}")
            }
        }
    }
}

impl<T: fmt::Debug + fmt::Display> std::error::Error for MeanError<T> {}

impl<T: Scalar> From<MeanError<T>> for Error {
    fn from(e: MeanError<T>) -> Self {
        match e {
            MeanError::NonConvergence {
                iterations, residual, ..
            } => Error::MeanNonConvergence {
                iterations,
                residual: residual.as_f64(),
            },
            MeanError::Failed { iteration, source } => Error::MeanIteration {
                iteration,
                source: Box::new(source),
            },
        }
    }
}

/// One fixed-point sweep evaluated at `base`.
struct Sweep<T: Scalar> {
    delta: TangentVector<T>,
    residual: T,
    next: ManifoldPoint<T>,
}

fn sweep<T, P>(base: &ManifoldPoint<T>, points: &[P]) -> Result<Sweep<T>>
where
    T: Scalar,
    P: Borrow<ManifoldPoint<T>> + Sync,
{
    let inv_n = T::one() / T::from_count(points.len());
    match base.kind() {
        ManifoldKind::Spd(n) => {
            // Log_base(x) = G log(G^-1 x G^-T) G^T, so the tangent average is
            // accumulated in whitened coordinates and colored once.
            let w = Whitening::new(n, base.data())?;
            let partials: Vec<Result<DMatrix<T>>> = points
                .par_chunks(CHUNK)
                .map(|chunk| {
                    let mut acc = DMatrix::<T>::zeros(n, n);
                    for p in chunk {
                        acc += w.log_whitened(p.borrow().data())?;
                    }
                    Ok(acc)
                })
                .collect();
            let mut sum = DMatrix::<T>::zeros(n, n);
            for part in partials {
                sum += part?;
            }
            let s = sum * inv_n;
            let residual = spd::frobenius_dot(&s, &s).sqrt();
            let delta = TangentVector::from_parts(base.clone(), spd::row_major(&w.color(&s)));
            let e = spd::map_symmetric(s, |l| l.exp())?;
            let next = ManifoldPoint::new_unchecked(base.kind(), spd::row_major(&w.color(&e)))?;
            Ok(Sweep { delta, residual, next })
        }
        kind => {
            let len = kind.tangent_len();
            let partials: Vec<Result<Vec<T>>> = points
                .par_chunks(CHUNK)
                .map(|chunk| {
                    let mut acc = vec![T::zero(); len];
                    for p in chunk {
                        let v = log_map(base, p.borrow())?;
                        for (a, &x) in acc.iter_mut().zip(v.data()) {
                            *a += x;
                        }
                    }
                    Ok(acc)
                })
                .collect();
            let mut sum = vec![T::zero(); len];
            for part in partials {
                for (a, x) in sum.iter_mut().zip(part?) {
                    *a += x;
                }
            }
            let delta = TangentVector::from_parts(base.clone(), sum.into_iter().map(|x| x * inv_n).collect());
            let residual = riemannian_norm(&delta);
            let next = exp_map(base, &delta)?;
            Ok(Sweep { delta, residual, next })
        }
    }
}

fn check_points<T, P>(points: &[P], kind: ManifoldKind) -> Result<()>
where
    T: Scalar,
    P: Borrow<ManifoldPoint<T>>,
{
    if points.is_empty() {
        return Err(invalid("intrinsic mean of an empty point set"));
    }
    if points.iter().any(|p| p.borrow().kind() != kind) {
        return Err(invalid("intrinsic mean over points on different manifolds"));
    }
    Ok(())
}

/// Average of `Log_base(x_i)` over the points.
pub fn mean_log<T, P>(base: &ManifoldPoint<T>, points: &[P]) -> Result<TangentVector<T>>
where
    T: Scalar,
    P: Borrow<ManifoldPoint<T>> + Sync,
{
    check_points(points, base.kind())?;
    Ok(sweep(base, points)?.delta)
}

/// Intrinsic mean starting from the first point.
pub fn intrinsic_mean<T, P>(
    points: &[P],
    params: &MeanSolverParams<T>,
) -> std::result::Result<ManifoldPoint<T>, MeanError<T>>
where
    T: Scalar,
    P: Borrow<ManifoldPoint<T>> + Sync,
{
    let first = points
        .first()
        .ok_or_else(|| MeanError::Failed {
            iteration: 0,
            source: invalid("intrinsic mean of an empty point set"),
        })?
        .borrow()
        .clone();
    intrinsic_mean_from(points, first, params)
}

/// Intrinsic mean iterated from `init`.
///
/// Each sweep sets `delta = mean_i Log_mu(x_i)` and `mu <- Exp_mu(delta)`,
/// stopping once `|delta|_mu <= tolerance`. A step whose next sweep has a
/// larger residual is retried at half length from the same iterate; widely
/// spread data (two textures in one region) otherwise falls into a 2-cycle.
/// Sweeps, including rejected ones, count toward `max_iters`.
pub fn intrinsic_mean_from<T, P>(
    points: &[P],
    init: ManifoldPoint<T>,
    params: &MeanSolverParams<T>,
) -> std::result::Result<ManifoldPoint<T>, MeanError<T>>
where
    T: Scalar,
    P: Borrow<ManifoldPoint<T>> + Sync,
{
    let fail = |iteration, source| MeanError::Failed { iteration, source };
    params.validate().map_err(|e| fail(0, e))?;
    check_points(points, init.kind()).map_err(|e| fail(0, e))?;

    let mut mu = init;
    let mut current = sweep(&mu, points).map_err(|e| fail(1, e))?;
    let mut step = T::one();
    let mut iteration = 1;
    loop {
        if current.residual <= params.tolerance {
            // After a shortened step the unit step may overshoot again; the
            // current iterate is the one whose residual was measured.
            return Ok(if step == T::one() { current.next } else { mu });
        }
        if iteration == params.max_iters {
            return Err(MeanError::NonConvergence {
                last: mu,
                iterations: iteration,
                residual: current.residual,
            });
        }
        iteration += 1;
        let candidate = if step == T::one() {
            current.next.clone()
        } else {
            exp_map(&mu, &current.delta.scaled(step)).map_err(|e| fail(iteration, e))?
        };
        let trial = sweep(&candidate, points).map_err(|e| fail(iteration, e))?;
        if trial.residual > current.residual && step > T::lit(MIN_STEP) {
            step *= T::lit(0.5);
            continue;
        }
        mu = candidate;
        current = trial;
    }
}
