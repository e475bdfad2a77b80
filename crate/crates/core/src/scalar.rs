//! Scalar abstraction shared by every closed-form routine.
//!
//! The physics is written once against [`Real`]; `f64` is the production
//! type and `f32` is supported for cheap surveys. Tolerances that only make
//! sense relative to the precision of the type live here as well.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps};

/// Floating point scalar used throughout the crate: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssignOps + Debug + Display + Default + Send + Sync + 'static
{
    /// Slack allowed on the smallest eigenvalue of a density matrix.
    fn psd_tolerance() -> Self;

    /// Tolerance on unit trace / unit norm checks.
    fn norm_tolerance() -> Self;

    /// Below this magnitude a coefficient is treated as exactly zero.
    fn zero_tolerance() -> Self;

    /// Lossless-enough conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::lit(2.0)
    }

    #[inline]
    fn sq(self) -> Self {
        self * self
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn psd_tolerance() -> Self {
        1e-12
    }
    fn norm_tolerance() -> Self {
        1e-12
    }
    fn zero_tolerance() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn psd_tolerance() -> Self {
        1e-6
    }
    fn norm_tolerance() -> Self {
        1e-5
    }
    fn zero_tolerance() -> Self {
        1e-6
    }
}

/// Binary entropy term `-x log2 x`, with `0 log 0 = 0` taken explicitly.
#[inline]
pub fn neg_xlog2x<T: Real>(x: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else {
        -x * x.log2()
    }
}

/// `x log2 x`, zero at the origin.
#[inline]
pub fn xlog2x<T: Real>(x: T) -> T {
    -neg_xlog2x(x)
}
