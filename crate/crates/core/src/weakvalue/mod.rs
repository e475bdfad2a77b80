//! Closed-form weak values for a target qubit `a` coupled to the meter by
//! `H = g sigma_3^a x`, with an optional control qubit `b` that never
//! interacts and only matters through its initial correlations with `a`.
//!
//! Every result is a ratio `<sigma_z>_W = S / D` where, for the post-selected
//! target vector `(a1, a0)` and the conditional (unnormalised) target
//! operator `tau` left after acting on the control,
//!
//! ```text
//! D = |a1|^2 tau_11 + |a0|^2 tau_00 + 2 J10 Re(a1 a0 tau_10)
//! S = |a1|^2 tau_11 - |a0|^2 tau_00
//! ```
//!
//! and the mean pointer momentum is `<p> = p0 - gt S / D`. `J10` is the only
//! place where the meter width enters.

mod aav;
mod sensitivity;
mod threshold;

pub use aav::{aav_weak_value, pointer_shift_imaginary, pointer_shift_real, AavWeakValue};
pub use sensitivity::{
    resolvable_angle, sensitivity_eta, sensitivity_report, weak_value_derivative_theta_b,
    DetectionReading, SensitivityReport,
};
pub use threshold::{amplification_threshold_gt, ThresholdModel};

use num_complex::Complex;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{check_range, Result};
use crate::meter::{MeterProfile, Spread};
use crate::scalar::Real;
use crate::states::{BellDiagonalState, PostSelection, TwoQubitPure};

/// Accumulated coupling `gt` (hbar = 1). Only `gt` and `gt / sigma` ever
/// appear, so `g` and `t` are not stored separately.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingSchedule<T = f64> {
    gt: T,
}

impl<T: Real> CouplingSchedule<T> {
    pub fn new(gt: T) -> Result<Self> {
        check_range("gt", gt.to_f64_lossy(), gt >= T::zero(), "[0, inf)")?;
        Ok(Self { gt })
    }

    pub fn gt(&self) -> T {
        self.gt
    }
}

/// Gaussian overlap integrals; `J11 = J00 = 1` are implicit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KJIntegrals<T = f64> {
    pub k11: T,
    pub k00: T,
    pub k10: T,
    pub j10: T,
}

/// Overlap factor `exp(-g^2 t^2 / (2 sigma^2))`, exactly 1 in the weak limit.
pub fn overlap_j10<T: Real>(m: &MeterProfile<T>, c: CouplingSchedule<T>) -> T {
    match m.spread() {
        Spread::Finite(sigma) => (-(c.gt / sigma).sq() * T::half()).exp(),
        Spread::Unbounded => T::one(),
    }
}

/// `K11 = p0 - gt`, `K00 = p0 + gt`, `K10 = p0 J10`, `J10 = e^{-g^2t^2/2sigma^2}`.
pub fn kj_integrals<T: Real>(m: &MeterProfile<T>, c: CouplingSchedule<T>) -> KJIntegrals<T> {
    let j10 = overlap_j10(m, c);
    KJIntegrals {
        k11: m.p0() - c.gt,
        k00: m.p0() + c.gt,
        k10: m.p0() * j10,
        j10,
    }
}

/// Numerical knobs shared by the weak-value evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings<T> {
    /// Denominators with magnitude below this are reported as divergent.
    pub eps_den: T,
}

impl<T: Real> Default for Settings<T> {
    fn default() -> Self {
        Self {
            eps_den: T::lit(1e-12),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Finite,
    /// Denominator below `eps_den`; the weak value is unbounded.
    Divergent,
    /// Numerator and denominator vanish together.
    Indeterminate,
}

/// Outcome of a weak-value evaluation.
///
/// `probability` is the post-selection success probability in the
/// weak-measurement limit. For a non-finite verdict the weak value and mean
/// momentum are absent and `denominator` carries the offending value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakValueReport<T = f64> {
    pub weak_value: Option<T>,
    pub mean_p: Option<T>,
    pub probability: T,
    pub amplified: bool,
    pub verdict: Verdict,
    pub denominator: T,
}

impl<T: Real> WeakValueReport<T> {
    /// Builds a report from `S / D`, applying the divergence cutoff.
    pub fn from_ratio(
        numerator: T,
        denominator: T,
        probability: T,
        m: &MeterProfile<T>,
        c: CouplingSchedule<T>,
        settings: &Settings<T>,
    ) -> Self {
        if denominator.abs() < settings.eps_den {
            let verdict = if numerator.abs() < settings.eps_den {
                Verdict::Indeterminate
            } else {
                Verdict::Divergent
            };
            return Self {
                weak_value: None,
                mean_p: None,
                probability,
                amplified: verdict == Verdict::Divergent,
                verdict,
                denominator,
            };
        }
        let wv = numerator / denominator;
        Self {
            weak_value: Some(wv),
            mean_p: Some(m.p0() - c.gt * wv),
            probability,
            amplified: wv.abs() > T::one(),
            verdict: Verdict::Finite,
            denominator,
        }
    }

    pub fn is_divergent(&self) -> bool {
        self.verdict == Verdict::Divergent
    }

    pub fn is_finite(&self) -> bool {
        self.verdict == Verdict::Finite
    }
}

#[derive(Serialize)]
struct ReportJson<T> {
    weak_value: Option<T>,
    mean_p: Option<T>,
    probability: T,
    amplified: bool,
    divergent: bool,
    indeterminate: bool,
    denominator: T,
}

impl<T: Real + Serialize> Serialize for WeakValueReport<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ReportJson {
            weak_value: self.weak_value,
            mean_p: self.mean_p,
            probability: self.probability,
            amplified: self.amplified,
            divergent: self.verdict == Verdict::Divergent,
            indeterminate: self.verdict == Verdict::Indeterminate,
            denominator: self.denominator,
        }
        .serialize(s)
    }
}

/// Unnormalised target operator left after post-selecting (or tracing) the
/// controls. Its off-diagonal element is the coherence the control
/// measurement hands to the target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalTarget<T = f64> {
    pub t11: T,
    pub t00: T,
    /// `<1| tau |0>`
    pub t10: Complex<T>,
}

impl<T: Real> ConditionalTarget<T> {
    pub fn coherence(&self) -> T {
        self.t10.norm()
    }

    pub fn trace(&self) -> T {
        self.t11 + self.t00
    }

    /// Meter-trace denominator for post-selection `ps_a` and overlap `j10`.
    pub fn denominator(&self, ps_a: &PostSelection<T>, j10: T) -> T {
        let (c2, s2, cross) = target_weights(ps_a);
        c2 * self.t11 + s2 * self.t00 + j10 * (cross * self.t10).re * T::two()
    }

    /// sigma_z-weighted part of the meter-trace numerator.
    pub fn sigma_numerator(&self, ps_a: &PostSelection<T>) -> T {
        let (c2, s2, _) = target_weights(ps_a);
        c2 * self.t11 - s2 * self.t00
    }

    pub fn report(
        &self,
        ps_a: &PostSelection<T>,
        m: &MeterProfile<T>,
        c: CouplingSchedule<T>,
        settings: &Settings<T>,
    ) -> WeakValueReport<T> {
        let d = self.denominator(ps_a, overlap_j10(m, c));
        let probability = clamp_probability(self.denominator(ps_a, T::one()));
        WeakValueReport::from_ratio(self.sigma_numerator(ps_a), d, probability, m, c, settings)
    }
}

/// `(cos^2(theta/2), sin^2(theta/2), cos(theta/2) sin(theta/2) e^{i phi})`
fn target_weights<T: Real>(ps: &PostSelection<T>) -> (T, T, Complex<T>) {
    let h = ps.theta() * T::half();
    let (s, c) = h.sin_cos();
    (c * c, s * s, Complex::from_polar(c * s, ps.phi()))
}

pub(crate) fn clamp_probability<T: Real>(p: T) -> T {
    p.max(T::zero()).min(T::one())
}

/// `<p> = p0 - gt cos(theta_a)` when the control is traced out. Never
/// amplified: `|<p> - p0| <= gt`.
pub fn mean_p_traced<T: Real>(theta_a: T, m: &MeterProfile<T>, c: CouplingSchedule<T>) -> T {
    m.p0() - c.gt * theta_a.cos()
}

/// Numerator and normalised denominator of the projected-control weak
/// value on raw angles; `theta_b` may leave `[0, pi]` for derivative stencils.
pub(crate) fn projected_parts<T: Real>(
    c: [T; 3],
    theta_a: T,
    phi_a: T,
    theta_b: T,
    phi_b: T,
    j10: T,
) -> (T, T) {
    let [c1, c2, c3] = c;
    let num = c3 * theta_b.cos() + theta_a.cos();
    let interference = c1 * phi_a.cos() * phi_b.cos() + c2 * phi_a.sin() * phi_b.sin();
    let den = T::one()
        + c3 * theta_a.cos() * theta_b.cos()
        + j10 * theta_a.sin() * theta_b.sin() * interference;
    (num, den)
}

/// Weak value with the control projected on `ps_b`:
///
/// ```text
/// (c3 cos tb + cos ta) / (1 + c3 cos ta cos tb
///     + J10 sin ta sin tb (c1 cos pa cos pb + c2 sin pa sin pb))
/// ```
pub fn weak_value_projected<T: Real>(
    state: &BellDiagonalState<T>,
    ps_a: &PostSelection<T>,
    ps_b: &PostSelection<T>,
    m: &MeterProfile<T>,
    c: CouplingSchedule<T>,
) -> WeakValueReport<T> {
    weak_value_projected_with(state, ps_a, ps_b, m, c, &Settings::default())
}

pub fn weak_value_projected_with<T: Real>(
    state: &BellDiagonalState<T>,
    ps_a: &PostSelection<T>,
    ps_b: &PostSelection<T>,
    m: &MeterProfile<T>,
    c: CouplingSchedule<T>,
    settings: &Settings<T>,
) -> WeakValueReport<T> {
    let (num, den) = projected_parts(
        state.coefficients(),
        ps_a.theta(),
        ps_a.phi(),
        ps_b.theta(),
        ps_b.phi(),
        overlap_j10(m, c),
    );
    let probability = postselection_probability(state, ps_a, ps_b);
    WeakValueReport::from_ratio(num, den, probability, m, c, settings)
}

/// Bell `|Phi+>` specialisation with `delta = phi_a + phi_b`:
/// `(cos tb + cos ta) / (1 + cos ta cos tb + J10 sin ta sin tb cos delta)`.
pub fn weak_value_bell<T: Real>(
    ps_a: &PostSelection<T>,
    ps_b: &PostSelection<T>,
    m: &MeterProfile<T>,
    c: CouplingSchedule<T>,
) -> WeakValueReport<T> {
    weak_value_bell_with(ps_a, ps_b, m, c, &Settings::default())
}

pub fn weak_value_bell_with<T: Real>(
    ps_a: &PostSelection<T>,
    ps_b: &PostSelection<T>,
    m: &MeterProfile<T>,
    c: CouplingSchedule<T>,
    settings: &Settings<T>,
) -> WeakValueReport<T> {
    let (ta, tb) = (ps_a.theta(), ps_b.theta());
    let delta = ps_a.phi() + ps_b.phi();
    let num = tb.cos() + ta.cos();
    let den = T::one() + ta.cos() * tb.cos() + overlap_j10(m, c) * ta.sin() * tb.sin() * delta.cos();
    let probability = postselection_probability(&BellDiagonalState::bell_phi_plus(), ps_a, ps_b);
    WeakValueReport::from_ratio(num, den, probability, m, c, settings)
}

/// Target prepared in `(|0> + |1>)/sqrt(2)` with no correlations:
/// `cos ta / (1 + J10 sin ta cos pa)`, the same whether the control is
/// traced or projected. The probability is that of the target post-selection
/// alone.
pub fn weak_value_uncorrelated<T: Real>(
    ps_a: &PostSelection<T>,
    m: &MeterProfile<T>,
    c: CouplingSchedule<T>,
) -> WeakValueReport<T> {
    weak_value_uncorrelated_with(ps_a, m, c, &Settings::default())
}

pub fn weak_value_uncorrelated_with<T: Real>(
    ps_a: &PostSelection<T>,
    m: &MeterProfile<T>,
    c: CouplingSchedule<T>,
    settings: &Settings<T>,
) -> WeakValueReport<T> {
    let (num, den) = uncorrelated_parts(ps_a.theta(), ps_a.phi(), overlap_j10(m, c));
    let probability = clamp_probability((T::one() + ps_a.theta().sin() * ps_a.phi().cos()) * T::half());
    WeakValueReport::from_ratio(num, den, probability, m, c, settings)
}

pub(crate) fn uncorrelated_parts<T: Real>(theta_a: T, phi_a: T, j10: T) -> (T, T) {
    (theta_a.cos(), T::one() + j10 * theta_a.sin() * phi_a.cos())
}

/// Initial two-qubit states that admit a post-selection probability.
pub trait Preselected<T: Real> {
    /// Probability of finding `ps_a (x) ps_b`.
    fn postselection_probability(&self, ps_a: &PostSelection<T>, ps_b: &PostSelection<T>) -> T;
}

impl<T: Real> Preselected<T> for BellDiagonalState<T> {
    /// `<psi_a psi_b| rho |psi_a psi_b>`
    fn postselection_probability(&self, ps_a: &PostSelection<T>, ps_b: &PostSelection<T>) -> T {
        let (num, den) = projected_parts(
            self.coefficients(),
            ps_a.theta(),
            ps_a.phi(),
            ps_b.theta(),
            ps_b.phi(),
            T::one(),
        );
        let _ = num;
        clamp_probability(den * T::lit(0.25))
    }
}

impl<T: Real> Preselected<T> for TwoQubitPure<T> {
    /// `|<psi_a psi_b | psi>|^2`
    fn postselection_probability(&self, ps_a: &PostSelection<T>, ps_b: &PostSelection<T>) -> T {
        let va = ps_a.vector();
        let vb = ps_b.vector();
        let amps = self.amplitudes();
        let mut overlap = Complex::new(T::zero(), T::zero());
        for i in 0..2 {
            for j in 0..2 {
                overlap += (va[i] * vb[j]).conj() * amps[2 * i + j];
            }
        }
        clamp_probability(overlap.norm_sqr())
    }
}

pub fn postselection_probability<T: Real, S: Preselected<T> + ?Sized>(
    state: &S,
    ps_a: &PostSelection<T>,
    ps_b: &PostSelection<T>,
) -> T {
    state.postselection_probability(ps_a, ps_b)
}

/// Conditional target operator `<psi_b| rho |psi_b>` of a BD state. A zero
/// off-diagonal element means this control outcome cannot steer the weak
/// value.
pub fn coherence_generated<T: Real>(
    state: &BellDiagonalState<T>,
    ps_b: &PostSelection<T>,
) -> ConditionalTarget<T> {
    let [c1, c2, c3] = state.coefficients();
    let (tb, pb) = (ps_b.theta(), ps_b.phi());
    let q = T::lit(0.25);
    let z3 = c3 * tb.cos();
    // rho_10 restricted to b is (c1 sigma_1 - i c2 sigma_2) / 4
    let x = tb.sin() * pb.cos();
    let y = tb.sin() * pb.sin();
    ConditionalTarget {
        t11: (T::one() + z3) * q,
        t00: (T::one() - z3) * q,
        t10: Complex::new(c1 * x * q, -c2 * y * q),
    }
}

/// Conditional target operator when the control is traced out: `I / 2`.
pub fn traced_control_target<T: Real>() -> ConditionalTarget<T> {
    ConditionalTarget {
        t11: T::half(),
        t00: T::half(),
        t10: Complex::new(T::zero(), T::zero()),
    }
}

/// A full two-qubit working point: BD state, both post-selections, meter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlConfig<T = f64> {
    pub state: BellDiagonalState<T>,
    pub ps_a: PostSelection<T>,
    pub ps_b: PostSelection<T>,
    pub meter: MeterProfile<T>,
    pub coupling: CouplingSchedule<T>,
}

impl<T: Real> ControlConfig<T> {
    pub fn report(&self) -> WeakValueReport<T> {
        weak_value_projected(&self.state, &self.ps_a, &self.ps_b, &self.meter, self.coupling)
    }

    pub fn j10(&self) -> T {
        overlap_j10(&self.meter, self.coupling)
    }

    /// Weak value with `theta_b` replaced; `None` at a divergence.
    pub(crate) fn weak_value_at_theta_b(&self, theta_b: T, eps: T) -> Option<T> {
        let (n, d) = projected_parts(
            self.state.coefficients(),
            self.ps_a.theta(),
            self.ps_a.phi(),
            theta_b,
            self.ps_b.phi(),
            self.j10(),
        );
        (d.abs() >= eps).then(|| n / d)
    }
}

/// Interference-free limit: the weak value with `J10 = 0`.
/// `None` when even the incoherent denominator vanishes.
pub fn asymptotic_weak_value<T: Real>(config: &ControlConfig<T>) -> Option<T> {
    let (n, d) = projected_parts(
        config.state.coefficients(),
        config.ps_a.theta(),
        config.ps_a.phi(),
        config.ps_b.theta(),
        config.ps_b.phi(),
        T::zero(),
    );
    (d.abs() >= Settings::<T>::default().eps_den).then(|| n / d)
}

#[cfg(test)]
mod tests;
