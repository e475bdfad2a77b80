//! Three qubits: target `a` plus two controls `b` and `e`, each of which is
//! either post-selected or ignored. Everything reduces to the conditional
//! target operator of [`ConditionalTarget`], so the two-qubit machinery
//! carries over unchanged.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WvaError};
use crate::meter::MeterProfile;
use crate::roots::bisect;
use crate::scalar::Real;
use crate::states::{PostSelection, ThreeQubitPure, ThreeQubitTag};
use crate::weakvalue::{
    overlap_j10, postselection_probability, ConditionalTarget, ControlConfig, CouplingSchedule,
    KJIntegrals, Settings, WeakValueReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "action",
    rename_all = "snake_case",
    bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>")
)]
pub enum ControlAction<T = f64> {
    Project(PostSelection<T>),
    Trace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "ScenarioJson<T>",
    into = "ScenarioJson<T>",
    bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>")
)]
pub struct ThreeQubitScenario<T = f64> {
    pub initial: ThreeQubitPure<T>,
    pub ps_a: PostSelection<T>,
    /// Actions on `b` and `e`, in that order.
    pub controls: [ControlAction<T>; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
struct ScenarioJson<T> {
    initial: ThreeQubitTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    amplitudes: Option<Vec<[T; 2]>>,
    ps_a: PostSelection<T>,
    controls: Vec<ControlAction<T>>,
}

impl<T: Real> TryFrom<ScenarioJson<T>> for ThreeQubitScenario<T> {
    type Error = WvaError;
    fn try_from(j: ScenarioJson<T>) -> Result<Self> {
        let initial = match (j.initial, j.amplitudes) {
            (ThreeQubitTag::Ghz, None) => ThreeQubitPure::ghz(),
            (ThreeQubitTag::W, None) => ThreeQubitPure::w(),
            (ThreeQubitTag::Custom, Some(a)) if a.len() == 8 => {
                let mut amps = [Complex::new(T::zero(), T::zero()); 8];
                for (z, [re, im]) in amps.iter_mut().zip(a) {
                    *z = Complex::new(re, im);
                }
                ThreeQubitPure::custom(amps)?
            }
            _ => {
                return Err(WvaError::Config(
                    "initial must be GHZ or W, or CUSTOM with 8 amplitudes".into(),
                ))
            }
        };
        let controls: [ControlAction<T>; 2] = j
            .controls
            .try_into()
            .map_err(|_| WvaError::Config("exactly two control actions (b, e) are required".into()))?;
        Ok(Self {
            initial,
            ps_a: j.ps_a,
            controls,
        })
    }
}

impl<T: Real> From<ThreeQubitScenario<T>> for ScenarioJson<T> {
    fn from(s: ThreeQubitScenario<T>) -> Self {
        let amplitudes = (s.initial.tag() == ThreeQubitTag::Custom)
            .then(|| s.initial.amplitudes().iter().map(|z| [z.re, z.im]).collect());
        ScenarioJson {
            initial: s.initial.tag(),
            amplitudes,
            ps_a: s.ps_a,
            controls: s.controls.to_vec(),
        }
    }
}

/// Contraction weights of one control: a projection contributes the single
/// bra `<psi|`, a trace the two basis bras.
fn branches<T: Real>(action: &ControlAction<T>) -> Vec<[Complex<T>; 2]> {
    let one = Complex::new(T::one(), T::zero());
    let zero = Complex::new(T::zero(), T::zero());
    match action {
        ControlAction::Project(ps) => {
            let v = ps.vector();
            vec![[v[0].conj(), v[1].conj()]]
        }
        ControlAction::Trace => vec![[one, zero], [zero, one]],
    }
}

impl<T: Real> ThreeQubitScenario<T> {
    pub fn new(initial: ThreeQubitPure<T>, ps_a: PostSelection<T>, controls: [ControlAction<T>; 2]) -> Self {
        Self {
            initial,
            ps_a,
            controls,
        }
    }

    /// `tau = sum over traced labels of u u^dagger`, where `u` is the target
    /// vector left after contracting the controls with their bras.
    pub fn conditional_target(&self) -> ConditionalTarget<T> {
        let amps = self.initial.amplitudes();
        let zero = Complex::new(T::zero(), T::zero());
        let mut t = [[zero; 2]; 2];
        for wb in branches(&self.controls[0]) {
            for we in branches(&self.controls[1]) {
                let mut u = [zero; 2];
                for (ia, ua) in u.iter_mut().enumerate() {
                    for (ib, xb) in wb.iter().enumerate() {
                        for (ie, xe) in we.iter().enumerate() {
                            let idx = (ia << 2) | (ib << 1) | ie;
                            *ua += *xb * *xe * amps[idx];
                        }
                    }
                }
                for i in 0..2 {
                    for j in 0..2 {
                        t[i][j] += u[i] * u[j].conj();
                    }
                }
            }
        }
        ConditionalTarget {
            t11: t[0][0].re,
            t00: t[1][1].re,
            t10: t[0][1],
        }
    }

    pub fn report(&self, m: &MeterProfile<T>, c: CouplingSchedule<T>) -> WeakValueReport<T> {
        self.report_with(m, c, &Settings::default())
    }

    pub fn report_with(
        &self,
        m: &MeterProfile<T>,
        c: CouplingSchedule<T>,
        settings: &Settings<T>,
    ) -> WeakValueReport<T> {
        self.conditional_target().report(&self.ps_a, m, c, settings)
    }

    /// Meter-traced denominator `sum conj(a_i) a_j tau_ij J_ij`.
    pub fn denominator(&self, m: &MeterProfile<T>, c: CouplingSchedule<T>) -> T {
        self.conditional_target().denominator(&self.ps_a, overlap_j10(m, c))
    }

    /// The same sum with every `J_ij` replaced by `K_ij`; equals
    /// `p0 D - gt S`, so `(p0 D - N) / (gt D)` is the weak value.
    pub fn k_numerator(&self, kj: &KJIntegrals<T>) -> T {
        k_substituted(&self.conditional_target(), &self.ps_a, kj)
    }
}

pub(crate) fn k_substituted<T: Real>(
    tau: &ConditionalTarget<T>,
    ps_a: &PostSelection<T>,
    kj: &KJIntegrals<T>,
) -> T {
    let h = ps_a.theta() * T::half();
    let (s, c) = h.sin_cos();
    let cross = Complex::from_polar(c * s, ps_a.phi()) * tau.t10;
    c * c * tau.t11 * kj.k11 + s * s * tau.t00 * kj.k00 + T::two() * cross.re * kj.k10
}

fn half_angles<T: Real>(theta: T) -> (T, T) {
    let (s, c) = (theta * T::half()).sin_cos();
    (c, s)
}

/// GHZ with both controls projected:
/// `(1/16)[8 ca^2 cb^2 ce^2 + 8 sa^2 sb^2 se^2 + 2 sin ta sin tb sin te cos(phi_abe) J10]`
/// with half-angle cosines `c` and sines `s`.
pub fn ghz_projected_denominator<T: Real>(
    theta_a: T,
    theta_b: T,
    theta_e: T,
    phi_abe: T,
    m: &MeterProfile<T>,
    c: CouplingSchedule<T>,
) -> T {
    let (ca, sa) = half_angles(theta_a);
    let (cb, sb) = half_angles(theta_b);
    let (ce, se) = half_angles(theta_e);
    let eight = T::lit(8.0);
    let sum = eight * (ca * cb * ce).sq()
        + eight * (sa * sb * se).sq()
        + T::two() * theta_a.sin() * theta_b.sin() * theta_e.sin() * phi_abe.cos() * overlap_j10(m, c);
    sum / T::lit(16.0)
}

/// Numerator partner of [`ghz_projected_denominator`]:
/// `(1/2)(ca^2 cb^2 ce^2 - sa^2 sb^2 se^2)`.
pub fn ghz_projected_sigma_numerator<T: Real>(theta_a: T, theta_b: T, theta_e: T) -> T {
    let (ca, sa) = half_angles(theta_a);
    let (cb, sb) = half_angles(theta_b);
    let (ce, se) = half_angles(theta_e);
    ((ca * cb * ce).sq() - (sa * sb * se).sq()) * T::half()
}

/// Weak value of a GHZ scenario with both controls projected.
pub fn ghz_weak_value<T: Real>(
    scenario: &ThreeQubitScenario<T>,
    m: &MeterProfile<T>,
    c: CouplingSchedule<T>,
) -> Result<WeakValueReport<T>> {
    let (ps_b, ps_e) = match (scenario.initial.tag(), scenario.controls) {
        (ThreeQubitTag::Ghz, [ControlAction::Project(b), ControlAction::Project(e)]) => (b, e),
        _ => {
            return Err(WvaError::Config(
                "ghz_weak_value needs a GHZ state with both controls projected".into(),
            ))
        }
    };
    let ta = scenario.ps_a.theta();
    let phi = scenario.ps_a.phi() + ps_b.phi() + ps_e.phi();
    let d = ghz_projected_denominator(ta, ps_b.theta(), ps_e.theta(), phi, m, c);
    let p = ghz_projected_denominator(ta, ps_b.theta(), ps_e.theta(), phi, &MeterProfile::weak_limit(m.p0()), c);
    let s = ghz_projected_sigma_numerator(ta, ps_b.theta(), ps_e.theta());
    Ok(WeakValueReport::from_ratio(
        s,
        d,
        crate::weakvalue::clamp_probability(p),
        m,
        c,
        &Settings::default(),
    ))
}

/// W state, `b` traced and `e` projected:
/// `(1/6)[2 ca^2 se^2 + 2 sa^2 + sin ta sin te cos(phi_a - phi_e) J10]`.
pub fn w_trace_project_denominator<T: Real>(
    theta_a: T,
    theta_e: T,
    phi_a: T,
    phi_e: T,
    m: &MeterProfile<T>,
    c: CouplingSchedule<T>,
) -> T {
    w_trace_project_den_j(theta_a, theta_e, phi_a - phi_e, overlap_j10(m, c))
}

fn w_trace_project_den_j<T: Real>(theta_a: T, theta_e: T, dphi: T, j10: T) -> T {
    let (ca, sa) = half_angles(theta_a);
    let (_, se) = half_angles(theta_e);
    (T::two() * (ca * se).sq() + T::two() * sa * sa + theta_a.sin() * theta_e.sin() * dphi.cos() * j10)
        / T::lit(6.0)
}

/// `(1/6)(2 ca^2 se^2 - 2 sa^2)`
pub fn w_trace_project_sigma_numerator<T: Real>(theta_a: T, theta_e: T) -> T {
    let (ca, sa) = half_angles(theta_a);
    let (_, se) = half_angles(theta_e);
    (T::two() * (ca * se).sq() - T::two() * sa * sa) / T::lit(6.0)
}

pub fn w_trace_project_weak_value<T: Real>(
    theta_a: T,
    theta_e: T,
    phi_a: T,
    phi_e: T,
    m: &MeterProfile<T>,
    c: CouplingSchedule<T>,
) -> WeakValueReport<T> {
    let d = w_trace_project_denominator(theta_a, theta_e, phi_a, phi_e, m, c);
    let p = w_trace_project_den_j(theta_a, theta_e, phi_a - phi_e, T::one());
    let s = w_trace_project_sigma_numerator(theta_a, theta_e);
    WeakValueReport::from_ratio(
        s,
        d,
        crate::weakvalue::clamp_probability(p),
        m,
        c,
        &Settings::default(),
    )
}

/// W state with both controls traced: `(1/3)(1 + sa^2) >= 1/3`.
pub fn w_traced_both_denominator<T: Real>(theta_a: T) -> T {
    let (_, sa) = half_angles(theta_a);
    (T::one() + sa * sa) / T::lit(3.0)
}

/// `(1/3)(ca^2 - 2 sa^2)`
pub fn w_traced_both_sigma_numerator<T: Real>(theta_a: T) -> T {
    let (ca, sa) = half_angles(theta_a);
    (ca * ca - T::two() * sa * sa) / T::lit(3.0)
}

/// A weak value with its post-selection probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Working<T = f64> {
    pub weak_value: Option<T>,
    pub probability: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EfficiencyComparison<T = f64> {
    pub two_qubit: Working<T>,
    pub three_qubit: Working<T>,
    /// three-qubit probability over two-qubit probability
    pub probability_ratio: T,
}

pub fn efficiency_comparison<T: Real>(
    two: &ControlConfig<T>,
    three: &ThreeQubitScenario<T>,
) -> EfficiencyComparison<T> {
    let r2 = two.report();
    let r3 = three.report(&two.meter, two.coupling);
    let p2 = postselection_probability(&two.state, &two.ps_a, &two.ps_b);
    EfficiencyComparison {
        two_qubit: Working {
            weak_value: r2.weak_value,
            probability: p2,
        },
        three_qubit: Working {
            weak_value: r3.weak_value,
            probability: r3.probability,
        },
        probability_ratio: r3.probability / p2,
    }
}

/// Tunes the total GHZ phase `phi_abe` in `[2 pi, 3 pi]` so that the
/// both-projected weak value reaches `target`. The phase is carried by `a`
/// with `phi_b = phi_e = pi`.
pub fn ghz_tune_phase<T: Real>(
    theta_a: T,
    theta_b: T,
    theta_e: T,
    target: T,
    m: &MeterProfile<T>,
    c: CouplingSchedule<T>,
) -> Result<(ThreeQubitScenario<T>, WeakValueReport<T>)> {
    let build = |phi_abe: T| -> Result<ThreeQubitScenario<T>> {
        let phi_a = (phi_abe - T::TAU()).max(T::zero()).min(T::PI());
        Ok(ThreeQubitScenario::new(
            ThreeQubitPure::ghz(),
            PostSelection::new(theta_a, phi_a)?,
            [
                ControlAction::Project(PostSelection::new(theta_b, T::PI())?),
                ControlAction::Project(PostSelection::new(theta_e, T::PI())?),
            ],
        ))
    };
    let s = ghz_projected_sigma_numerator(theta_a, theta_b, theta_e);
    let f = |phi_abe: T| {
        let d = ghz_projected_denominator(theta_a, theta_b, theta_e, phi_abe, m, c);
        s / d - target
    };
    let lo = T::TAU();
    let hi = T::lit(3.0) * T::PI();
    let phi = if f(hi).abs() <= T::zero_tolerance() {
        hi
    } else {
        bisect(lo, hi, T::zero(), f).ok_or_else(|| {
            WvaError::Infeasible(format!(
                "weak value {} is not reachable by tuning the GHZ phase",
                target.to_f64_lossy()
            ))
        })?
    };
    let scenario = build(phi)?;
    let report = ghz_weak_value(&scenario, m, c)?;
    Ok((scenario, report))
}

/// Grid for the W trace-b / project-e supremum search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupGrid {
    pub theta_a: usize,
    pub theta_e: usize,
    pub delta_phi: usize,
}

impl Default for SupGrid {
    fn default() -> Self {
        Self {
            theta_a: 181,
            theta_e: 181,
            delta_phi: 72,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupResult<T = f64> {
    /// Largest `|WV|` on the grid.
    pub grid_sup: T,
    /// `(theta_a, theta_e, phi_a - phi_e)` of the grid maximum.
    pub grid_argmax: [T; 3],
    /// After coordinate refinement from the grid maximum.
    pub refined_sup: T,
    pub refined_argmax: [T; 3],
    pub skipped_singular: usize,
}

fn w_abs_weak_value<T: Real>(x: [T; 3], eps: T) -> Option<T> {
    let d = w_trace_project_den_j(x[0], x[1], x[2], T::one());
    (d.abs() >= eps).then(|| (w_trace_project_sigma_numerator(x[0], x[1]) / d).abs())
}

/// Weak-limit supremum of `|WV|` for the W state with `b` traced and `e`
/// projected. Rows are scanned in parallel; ties keep the lowest index.
pub fn w_supremum_search<T: Real>(grid: SupGrid) -> SupResult<T> {
    let eps = Settings::<T>::default().eps_den;
    let axis = |k: usize, n: usize| T::PI() * T::lit(k as f64) / T::lit((n.max(2) - 1) as f64);
    let phase = |k: usize| T::TAU() * T::lit(k as f64) / T::lit(grid.delta_phi.max(1) as f64);
    let rows: Vec<(T, usize, usize)> = (0..grid.theta_a)
        .into_par_iter()
        .map(|ia| {
            let ta = axis(ia, grid.theta_a);
            let mut best = (T::neg_infinity(), usize::MAX);
            let mut skipped = 0;
            for ie in 0..grid.theta_e {
                let te = axis(ie, grid.theta_e);
                for ip in 0..grid.delta_phi {
                    match w_abs_weak_value([ta, te, phase(ip)], eps) {
                        Some(v) if v > best.0 => best = (v, ie * grid.delta_phi + ip),
                        Some(_) => {}
                        None => skipped += 1,
                    }
                }
            }
            (best.0, best.1, skipped)
        })
        .collect();
    let mut grid_sup = T::neg_infinity();
    let mut arg = [T::zero(); 3];
    let mut skipped_singular = 0;
    for (ia, (v, flat, skipped)) in rows.into_iter().enumerate() {
        skipped_singular += skipped;
        if v > grid_sup {
            grid_sup = v;
            let (ie, ip) = (flat / grid.delta_phi, flat % grid.delta_phi);
            arg = [axis(ia, grid.theta_a), axis(ie, grid.theta_e), phase(ip)];
        }
    }
    let (refined_sup, refined_argmax) = refine_max(arg, grid_sup, eps);
    SupResult {
        grid_sup,
        grid_argmax: arg,
        refined_sup,
        refined_argmax,
        skipped_singular,
    }
}

/// Coordinate ascent on `|WV|` with step halving down to `1e-6`, staying in
/// the angle box and away from singular points.
fn refine_max<T: Real>(start: [T; 3], value: T, eps: T) -> (T, [T; 3]) {
    let lo = [T::zero(), T::zero(), T::neg_infinity()];
    let hi = [T::PI(), T::PI(), T::infinity()];
    let mut x = start;
    let mut best = value;
    let mut step = T::lit(0.01);
    let mut iterations = 0;
    while step >= T::lit(1e-6) && iterations < 10_000 {
        iterations += 1;
        let mut improved = false;
        for k in 0..3 {
            for dir in [T::one(), -T::one()] {
                let mut y = x;
                y[k] = (y[k] + dir * step).max(lo[k]).min(hi[k]);
                if let Some(v) = w_abs_weak_value(y, eps) {
                    if v > best {
                        best = v;
                        x = y;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step *= T::half();
        }
    }
    (best, x)
}
