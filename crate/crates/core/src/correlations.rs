//! Entanglement and discord of the initial two-qubit state. All
//! information quantities are in bits.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Result};
use crate::linalg::pauli;
use crate::scalar::{neg_xlog2x, xlog2x, Real};
use crate::states::{BellDiagonalState, TwoQubitDensity};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport<T = f64> {
    pub concurrence: T,
    /// entanglement of formation, bits
    pub eof: T,
    /// bits
    pub mutual_information: T,
    /// bits
    pub classical_correlation: T,
    /// bits
    pub quantum_discord: T,
}

/// Wootters concurrence `max(0, mu1 - mu2 - mu3 - mu4)`, with `mu_i` the
/// decreasing square roots of the spectrum of `rho (sy x sy) rho* (sy x sy)`.
///
/// The `mu_i` are computed as the singular values of `sqrt(rho) sqrt(rho~)`,
/// which avoids the square root of a near-zero eigenvalue.
pub fn concurrence<T: Real>(rho: &TwoQubitDensity<T>) -> T {
    let m = rho.matrix();
    let yy = pauli::<T>(2).kron(&pauli(2));
    let flipped = &(&yy * &m.conj()) * &yy;
    let mu = (&m.psd_sqrt() * &flipped.psd_sqrt()).singular_values();
    (mu[0] - mu[1] - mu[2] - mu[3]).max(T::zero())
}

/// Concurrence of a BD state from its spectrum, `max(0, 2 lambda_max - 1)`.
pub fn bd_concurrence<T: Real>(state: &BellDiagonalState<T>) -> T {
    let lmax = state
        .eigenvalues()
        .iter()
        .fold(T::neg_infinity(), |m, &l| m.max(l));
    (T::two() * lmax - T::one()).max(T::zero())
}

/// `h((1 + sqrt(1 - C^2)) / 2)` with the binary entropy `h`.
pub fn eof_from_concurrence<T: Real>(c: T) -> Result<T> {
    check_range(
        "concurrence",
        c.to_f64_lossy(),
        c >= T::zero() && c <= T::one(),
        "[0, 1]",
    )?;
    let x = (T::one() + (T::one() - c * c).max(T::zero()).sqrt()) * T::half();
    Ok(neg_xlog2x(x) + neg_xlog2x(T::one() - x))
}

/// `2 + sum_k lambda_k log2 lambda_k`
pub fn bd_mutual_information<T: Real>(state: &BellDiagonalState<T>) -> T {
    state
        .eigenvalues()
        .iter()
        .fold(T::two(), |acc, &l| acc + xlog2x(l))
}

/// `(1-c)/2 log2(1-c) + (1+c)/2 log2(1+c)` with `c = max_j |c_j|`.
pub fn bd_classical_correlation<T: Real>(state: &BellDiagonalState<T>) -> T {
    let c = state
        .coefficients()
        .iter()
        .fold(T::zero(), |m, &x| m.max(x.abs()));
    let lo = T::one() - c;
    let hi = T::one() + c;
    T::half() * (xlog2x(lo) + xlog2x(hi))
}

/// Mutual information minus classical correlation, clamped at zero.
pub fn bd_quantum_discord<T: Real>(state: &BellDiagonalState<T>) -> T {
    (bd_mutual_information(state) - bd_classical_correlation(state)).max(T::zero())
}

/// True iff exactly one correlation coefficient is nonzero.
pub fn classify_axis_classical<T: Real>(state: &BellDiagonalState<T>) -> bool {
    state
        .coefficients()
        .iter()
        .filter(|c| c.abs() >= T::zero_tolerance())
        .count()
        == 1
}

pub fn correlation_report<T: Real>(state: &BellDiagonalState<T>) -> CorrelationReport<T> {
    // The spectral shortcut is exact for BD inputs, so `eof == 0` exactly
    // when the concurrence is zero.
    let concurrence = bd_concurrence(state);
    let eof = eof_from_concurrence(concurrence.min(T::one())).expect("clamped concurrence");
    CorrelationReport {
        concurrence,
        eof,
        mutual_information: bd_mutual_information(state),
        classical_correlation: bd_classical_correlation(state),
        quantum_discord: bd_quantum_discord(state),
    }
}

/// Reduced-state check used by tests and the CLI: BD marginals are `I/2`.
pub fn marginal_deviation<T: Real>(rho: &TwoQubitDensity<T>) -> T {
    let half = Complex::new(T::half(), T::zero());
    let target = crate::linalg::CMatrix::identity(2).scale(half);
    rho.reduced(0)
        .max_abs_diff(&target)
        .max(rho.reduced(1).max_abs_diff(&target))
}
