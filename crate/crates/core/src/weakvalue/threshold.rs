use serde::{Deserialize, Serialize};

use crate::error::{check_range, Result, WvaError};
use crate::roots::bisect;
use crate::scalar::Real;
use crate::states::{BellDiagonalState, PostSelection};

use super::{projected_parts, uncorrelated_parts};

/// Working point without a coupling: everything `amplification_threshold_gt`
/// needs to evaluate the weak value as a function of `J10`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "model",
    rename_all = "snake_case",
    bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>")
)]
pub enum ThresholdModel<T = f64> {
    Projected {
        state: BellDiagonalState<T>,
        ps_a: PostSelection<T>,
        ps_b: PostSelection<T>,
    },
    Uncorrelated {
        ps_a: PostSelection<T>,
    },
}

impl<T: Real> ThresholdModel<T> {
    /// `(S, D)` at overlap `j10`.
    pub fn parts(&self, j10: T) -> (T, T) {
        match self {
            Self::Projected { state, ps_a, ps_b } => projected_parts(
                state.coefficients(),
                ps_a.theta(),
                ps_a.phi(),
                ps_b.theta(),
                ps_b.phi(),
                j10,
            ),
            Self::Uncorrelated { ps_a } => uncorrelated_parts(ps_a.theta(), ps_a.phi(), j10),
        }
    }

    /// `|WV| - 1` at overlap `j10`; a vanishing denominator counts as
    /// infinitely amplified.
    fn excess(&self, j10: T) -> T {
        let (n, d) = self.parts(j10);
        if d == T::zero() {
            T::infinity()
        } else {
            (n / d).abs() - T::one()
        }
    }
}

const SCAN_POINTS: usize = 4096;

/// Smallest `gt > 0` with `|WV| = 1` at meter width `sigma`.
///
/// `gt` is scanned over `(0, 20 sigma]` for the first sign change of
/// `|WV| - 1`, which is then bisected down to floating-point resolution.
pub fn amplification_threshold_gt<T: Real>(model: &ThresholdModel<T>, sigma: T) -> Result<T> {
    check_range("sigma", sigma.to_f64_lossy(), sigma > T::zero(), "(0, inf)")?;
    let j = |gt: T| (-(gt / sigma).sq() * T::half()).exp();
    let f = |gt: T| model.excess(j(gt));
    let at_zero = f(T::zero());
    if !(at_zero > T::zero()) {
        let wv = at_zero + T::one();
        return Err(WvaError::NoThreshold(format!(
            "|weak value| = {} <= 1 without decoherence",
            wv.to_f64_lossy()
        )));
    }
    let top = T::lit(20.0) * sigma;
    let step = top / T::lit(SCAN_POINTS as f64);
    let mut lo = T::zero();
    for k in 1..=SCAN_POINTS {
        let hi = step * T::lit(k as f64);
        if f(hi) <= T::zero() {
            return bisect(lo, hi, T::zero(), f)
                .ok_or_else(|| WvaError::NoThreshold("bracket lost during bisection".into()));
        }
        lo = hi;
    }
    Err(WvaError::NoThreshold(format!(
        "amplification persists up to gt = {}",
        top.to_f64_lossy()
    )))
}
