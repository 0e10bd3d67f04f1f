//! Scalar abstraction shared by every module.
//!
//! All math is written against [`Real`], implemented for `f32` and `f64`.
//! Reductions that must be reproducible (pillar accumulation, losses) widen
//! to `f64` through [`Real::widen`] regardless of the storage type.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point storage type: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Default + Debug + Display + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal, rounding to nearest for narrower types.
    fn lit(x: f64) -> Self;

    /// Lossless widening to the accumulator type.
    fn widen(self) -> f64;

    /// Tolerance used when checking that a rotation is orthonormal.
    fn orthonormal_tol() -> Self;
}

impl Real for f32 {
    #[inline(always)]
    fn lit(x: f64) -> Self {
        x as f32
    }

    #[inline(always)]
    fn widen(self) -> f64 {
        self as f64
    }

    fn orthonormal_tol() -> Self {
        1e-5
    }
}

impl Real for f64 {
    #[inline(always)]
    fn lit(x: f64) -> Self {
        x
    }

    #[inline(always)]
    fn widen(self) -> f64 {
        self
    }

    fn orthonormal_tol() -> Self {
        1e-9
    }
}
