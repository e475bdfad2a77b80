use num_complex::Complex;
use serde::Serialize;

use crate::error::{Result, WvaError};
use crate::linalg::CMatrix;
use crate::meter::MeterProfile;
use crate::scalar::Real;

use super::CouplingSchedule;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AavWeakValue<T = f64> {
    pub weak_value: Complex<T>,
    /// `|<post|pre>|^2`
    pub probability: T,
}

/// `<post| A |pre> / <post|pre>` for normalised pure states.
pub fn aav_weak_value<T: Real>(
    pre: &[Complex<T>],
    post: &[Complex<T>],
    a: &CMatrix<T>,
) -> Result<AavWeakValue<T>> {
    let n = a.dim();
    if pre.len() != n || post.len() != n {
        return Err(WvaError::InvalidDensity(format!(
            "state dimensions {} and {} do not match observable dimension {n}",
            pre.len(),
            post.len()
        )));
    }
    if !a.is_hermitian(T::psd_tolerance()) {
        return Err(WvaError::InvalidDensity("observable is not Hermitian".into()));
    }
    for v in [pre, post] {
        let norm: T = v.iter().map(|z| z.norm_sqr()).fold(T::zero(), |x, y| x + y);
        if (norm - T::one()).abs() > T::norm_tolerance() {
            return Err(WvaError::NotNormalised(norm.to_f64_lossy()));
        }
    }
    let zero = Complex::new(T::zero(), T::zero());
    let overlap = post
        .iter()
        .zip(pre)
        .fold(zero, |acc, (q, p)| acc + q.conj() * p);
    let probability = overlap.norm_sqr();
    if probability.sqrt() < T::zero_tolerance() {
        return Err(WvaError::OrthogonalSelection(overlap.norm().to_f64_lossy()));
    }
    let mut matrix_element = zero;
    for i in 0..n {
        for j in 0..n {
            matrix_element += post[i].conj() * a[(i, j)] * pre[j];
        }
    }
    Ok(AavWeakValue {
        weak_value: matrix_element / overlap,
        probability,
    })
}

/// Final mean momentum for a real weak value: `p0 - gt A`.
pub fn pointer_shift_real<T: Real>(a: T, m: &MeterProfile<T>, c: CouplingSchedule<T>) -> T {
    m.p0() - c.gt() * a
}

/// Final mean position for a purely imaginary weak value `iB`:
/// `<X>_i + 2 gt B Var(X)_i`, with `Var(X)_i = 1 / (4 sigma^2)`. In the
/// weak limit the position variance vanishes and so does the shift.
pub fn pointer_shift_imaginary<T: Real>(
    b: T,
    x_initial: T,
    m: &MeterProfile<T>,
    c: CouplingSchedule<T>,
) -> T {
    match m.sigma() {
        Some(sigma) => x_initial + T::two() * c.gt() * b / (T::lit(4.0) * sigma * sigma),
        None => x_initial,
    }
}
