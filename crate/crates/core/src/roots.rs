use crate::scalar::Real;

/// Bisection on `[lo, hi]` for a sign change of `f`. Iterates until the
/// bracket is narrower than `tol` or stops shrinking in floating point.
///
/// Returns `None` when the endpoints do not bracket a root.
pub fn bisect<T: Real>(mut lo: T, mut hi: T, tol: T, f: impl Fn(T) -> T) -> Option<T> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == T::zero() {
        return Some(lo);
    }
    if fhi == T::zero() {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return None;
    }
    for _ in 0..400 {
        let mid = (lo + hi) * T::half();
        if mid <= lo || mid >= hi || hi - lo <= tol {
            break;
        }
        let fmid = f(mid);
        if fmid == T::zero() {
            return Some(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Some((lo + hi) * T::half())
}
