//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All geometry, image and level-set code is written against [`Scalar`], which
//! is implemented for `f32` and `f64`. The crate root exposes `f64` aliases for
//! the common case.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point type usable by the solvers.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count or index into this scalar type.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// A validation tolerance of nominal size `nominal` (stated for `f64`),
    /// widened to a few thousand ulps for lower-precision types.
    #[inline]
    fn tolerance(nominal: f64) -> Self {
        let floor = Self::default_epsilon() * Self::lit(4096.0);
        let t = Self::lit(nominal);
        if t > floor {
            t
        } else {
            floor
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
