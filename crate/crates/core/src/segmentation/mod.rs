//! Active-contour solvers for manifold-valued images.
//!
//! Both solvers evolve a [`LevelSetField`] by explicit Euler steps and
//! periodically reinitialize it. A run is declared converged once the
//! interior mask changes by at most `convergence_tol` pixels per pixel per
//! iteration, averaged over a window of `convergence_window` iterations, for
//! [`CONVERGENCE_PATIENCE`] consecutive windows.

mod chan_vese;
mod gac;

pub use chan_vese::{
    compute_energy, data_speed, distance_fields, segment_chan_vese, segment_chan_vese_with_observer, ChanVeseParams,
};
pub use gac::{gac_speed_compact, gac_speed_expanded, segment_gac, segment_gac_with_observer, GacParams};

use crate::geometry::ManifoldPoint;
use crate::levelset::{extract_mask, LevelSetField, Mask};
use crate::scalar::Scalar;

/// Consecutive quiet windows required before a run counts as converged.
pub const CONVERGENCE_PATIENCE: usize = 3;

/// Energy decomposed into its weighted terms; `total` is their sum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyTerms<T> {
    pub length: T,
    pub area: T,
    pub data_in: T,
    pub data_out: T,
    pub total: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord<T> {
    pub iteration: usize,
    pub terms: EnergyTerms<T>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Warnings {
    /// Pixels whose derivatives or mean distances fell in a cut locus.
    pub cut_locus: usize,
    /// Intrinsic-mean solves that hit their iteration cap or failed.
    pub mean_non_convergence: usize,
    /// Mean updates skipped because a region was empty.
    pub empty_region: usize,
}

#[derive(Debug, Clone)]
pub struct SegmentationResult<T> {
    pub phi: LevelSetField<T>,
    pub mask: Mask,
    pub energy_trace: Vec<EnergyRecord<T>>,
    pub iterations: usize,
    pub converged: bool,
    pub mean_inside: Option<ManifoldPoint<T>>,
    pub mean_outside: Option<ManifoldPoint<T>>,
    /// Length weight actually used (Chan-Vese); zero for GAC.
    pub length_weight: T,
    pub warnings: Warnings,
}

/// Observer invoked after every iteration with the iteration number
/// (1-based) and the current level set.
pub type Observer<'a, T> = &'a mut dyn FnMut(usize, &LevelSetField<T>);

/// Mask-stability convergence test.
pub(crate) struct ConvergenceMonitor {
    tol: f64,
    window: usize,
    streak: usize,
    reference: Mask,
}

impl ConvergenceMonitor {
    pub(crate) fn new<T: Scalar>(phi: &LevelSetField<T>, tol: f64, window: usize) -> Self {
        Self {
            tol,
            window: window.max(1),
            streak: 0,
            reference: extract_mask(phi),
        }
    }

    /// Call after iteration `iteration`; returns true once converged.
    pub(crate) fn update<T: Scalar>(&mut self, iteration: usize, phi: &LevelSetField<T>) -> bool {
        if !iteration.is_multiple_of(self.window) {
            return false;
        }
        let mask = extract_mask(phi);
        let npix = (mask.height() * mask.width()) as f64;
        let rate = mask.hamming(&self.reference) as f64 / (npix * self.window as f64);
        self.reference = mask;
        if rate <= self.tol {
            self.streak += 1;
        } else {
            self.streak = 0;
        }
        self.streak >= CONVERGENCE_PATIENCE
    }
}

pub(crate) fn check_finite<T: Scalar>(phi: &[T], iteration: usize) -> crate::error::Result<()> {
    if phi.iter().any(|v| !v.is_finite()) {
        return Err(crate::error::Error::NumericalBlowup { iteration });
    }
    Ok(())
}
