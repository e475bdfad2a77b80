//! Gaussian momentum-space meter.
//!
//! Natural units with hbar = 1. The interaction only translates momentum
//! eigenstates, `|p> -> |p -+ gt>`, so the meter is fully described by its
//! centre `p0` and spread `sigma`. An unbounded spread stands for the
//! `sigma -> infinity` weak-measurement limit and is kept exact rather than
//! approximated by a large number.

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Result, WvaError};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spread<T> {
    Finite(T),
    /// `sigma -> infinity`
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeterProfile<T = f64> {
    p0: T,
    spread: Spread<T>,
}

/// Squeezing parameter `r >= 0`; `r = 0` is the coherent meter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeSpec<T> {
    pub r: T,
}

/// `sigma = e^r / 2`, i.e. `sigma^2 = e^{2r} / 4`.
pub fn sigma_from_squeeze<T: Real>(s: SqueezeSpec<T>) -> Result<T> {
    check_range("r", s.r.to_f64_lossy(), s.r >= T::zero(), "[0, inf)")?;
    Ok(s.r.exp() * T::half())
}

impl<T: Real> MeterProfile<T> {
    pub fn new(p0: T, sigma: T) -> Result<Self> {
        check_range("p0", p0.to_f64_lossy(), true, "finite reals")?;
        check_range("sigma", sigma.to_f64_lossy(), sigma > T::zero(), "(0, inf)")?;
        Ok(Self {
            p0,
            spread: Spread::Finite(sigma),
        })
    }

    pub fn squeezed(p0: T, r: T) -> Result<Self> {
        Self::new(p0, sigma_from_squeeze(SqueezeSpec { r })?)
    }

    pub fn weak_limit(p0: T) -> Self {
        Self {
            p0,
            spread: Spread::Unbounded,
        }
    }

    pub fn p0(&self) -> T {
        self.p0
    }

    pub fn spread(&self) -> Spread<T> {
        self.spread
    }

    /// Finite spread, or `None` in the weak limit.
    pub fn sigma(&self) -> Option<T> {
        match self.spread {
            Spread::Finite(s) => Some(s),
            Spread::Unbounded => None,
        }
    }

    pub fn is_weak_limit(&self) -> bool {
        matches!(self.spread, Spread::Unbounded)
    }

    pub fn with_p0(self, p0: T) -> Self {
        Self { p0, ..self }
    }
}

/// `phi(p) = (2 pi sigma^2)^{-1/4} exp(-(p - p0)^2 / (4 sigma^2))`.
pub fn wavefunction<T: Real>(m: &MeterProfile<T>, p: T) -> Result<T> {
    let sigma = m.sigma().ok_or(WvaError::UnboundedMeter)?;
    Ok(gaussian_amplitude(m.p0, sigma, p))
}

#[inline]
pub(crate) fn gaussian_amplitude<T: Real>(p0: T, sigma: T, p: T) -> T {
    let s2 = sigma * sigma;
    (T::TAU() * s2).powf(T::lit(-0.25)) * (-(p - p0).sq() / (T::lit(4.0) * s2)).exp()
}

/// Serialised meter: `{"p0":.., "sigma":..}` or `{"p0":.., "r":..}`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeterSpec {
    #[serde(default)]
    pub p0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
}

impl MeterSpec {
    pub fn to_profile(&self) -> Result<MeterProfile<f64>> {
        match (self.sigma, self.r) {
            (Some(sigma), None) => MeterProfile::new(self.p0, sigma),
            (None, Some(r)) => MeterProfile::squeezed(self.p0, r),
            _ => Err(WvaError::AmbiguousMeter),
        }
    }
}
