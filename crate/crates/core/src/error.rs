use thiserror::Error;

/// Errors raised by constructors and by operations whose preconditions fail.
///
/// Divergent weak values are not errors: they are reported through
/// [`crate::weakvalue::Verdict`] so callers still get the probability and the
/// offending denominator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum WvaError {
    #[error("invalid Bell-diagonal state ({c1}, {c2}, {c3}): eigenvalue {index} is {eigenvalue}")]
    InvalidBellDiagonal {
        c1: f64,
        c2: f64,
        c3: f64,
        index: usize,
        eigenvalue: f64,
    },

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("density matrix is not physical: {0}")]
    InvalidDensity(String),

    #[error("state vector is not normalised (norm^2 = {0})")]
    NotNormalised(f64),

    #[error("meter with unbounded spread has no normalisable wavefunction")]
    UnboundedMeter,

    #[error("meter spec must give exactly one of sigma or r")]
    AmbiguousMeter,

    #[error("derivative of the weak value vanishes at the working point ({0})")]
    ZeroDerivative(f64),

    #[error("weak value diverges at the working point (denominator {0:e})")]
    Divergent(f64),

    #[error("no amplification threshold: {0}")]
    NoThreshold(String),

    #[error("quadrature did not converge: doubling nodes changed the result by {change:e}")]
    NotConverged { change: f64 },

    #[error("pre- and post-selected states are orthogonal (overlap {0:e})")]
    OrthogonalSelection(f64),

    #[error("optimisation problem is infeasible: {0}")]
    Infeasible(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = WvaError> = std::result::Result<T, E>;

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    ok: bool,
    range: &'static str,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(WvaError::OutOfRange { name, value, range })
    }
}
