//! Brute-force check of the closed forms. The meter is integrated node by
//! node with the composite trapezoid rule and the controls are removed from
//! the full density matrix with generic linear algebra, so nothing here
//! depends on the analytic K/J results.
//!
//! Only the momentum-diagonal of the post-selected meter state is needed:
//! `rho_M(p, p) = sum_ij X_ij phi(p + s_i gt) phi(p + s_j gt)` with
//! `s_1 = +1`, `s_0 = -1`.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Result, WvaError};
use crate::linalg::{CMatrix, QubitReduction};
use crate::meter::{gaussian_amplitude, MeterProfile};
use crate::multiqubit::{ControlAction, ThreeQubitScenario};
use crate::scalar::Real;
use crate::states::{BellDiagonalState, PostSelection, ThreeQubitPure};
use crate::weakvalue::{mean_p_traced, weak_value_projected, CouplingSchedule, KJIntegrals, Verdict};

/// Composite trapezoid rule on `[p0 - W sigma - 2gt, p0 + W sigma + 2gt]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec<T = f64> {
    half_width: T,
    nodes: usize,
}

impl<T: Real> QuadratureSpec<T> {
    /// `half_width >= 8` (in units of sigma); `nodes >= 101` and odd.
    pub fn new(half_width: T, nodes: usize) -> Result<Self> {
        if !(half_width >= T::lit(8.0)) || !half_width.is_finite() {
            return Err(WvaError::OutOfRange {
                name: "half_width",
                value: half_width.to_f64_lossy(),
                range: "[8, inf)",
            });
        }
        if nodes < 101 || nodes.is_multiple_of(2) {
            return Err(WvaError::OutOfRange {
                name: "nodes",
                value: nodes as f64,
                range: "odd integers >= 101",
            });
        }
        Ok(Self { half_width, nodes })
    }

    /// Skips the width check so truncation studies can use narrow domains.
    pub fn narrow(half_width: T, nodes: usize) -> Result<Self> {
        let checked = Self::new(T::lit(8.0), nodes)?;
        Ok(Self {
            half_width,
            ..checked
        })
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Same domain, `2N - 1` nodes (every old node is kept).
    pub fn doubled(&self) -> Self {
        Self {
            nodes: 2 * self.nodes - 1,
            ..*self
        }
    }
}

impl<T: Real> Default for QuadratureSpec<T> {
    fn default() -> Self {
        Self {
            half_width: T::lit(12.0),
            nodes: 4001,
        }
    }
}

/// Fixed-order pairwise summation; identical input gives identical bits.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    if xs.len() <= 32 {
        return xs.iter().fold(T::zero(), |a, &b| a + b);
    }
    let (l, r) = xs.split_at(xs.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}

/// `int_a^b f` on `n` equally spaced nodes.
pub fn trapezoid<T: Real>(a: T, b: T, n: usize, f: impl Fn(T) -> T) -> T {
    let h = (b - a) / T::lit((n - 1) as f64);
    let vals: Vec<T> = (0..n)
        .map(|i| {
            let w = if i == 0 || i == n - 1 { T::half() } else { T::one() };
            w * f(a + h * T::lit(i as f64))
        })
        .collect();
    pairwise_sum(&vals) * h
}

/// All six meter integrals, obtained by quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleIntegrals<T = f64> {
    pub j11: T,
    pub j00: T,
    pub j10: T,
    pub k11: T,
    pub k00: T,
    pub k10: T,
}

impl<T: Real> OracleIntegrals<T> {
    pub fn to_kj(&self) -> KJIntegrals<T> {
        KJIntegrals {
            k11: self.k11,
            k00: self.k00,
            k10: self.k10,
            j10: self.j10,
        }
    }

    /// `[[J11, J10], [J10, J00]]` and the same for `K`, indexed by the
    /// target label position (0 for `|1>`, 1 for `|0>`).
    fn tables(&self) -> ([[T; 2]; 2], [[T; 2]; 2]) {
        (
            [[self.j11, self.j10], [self.j10, self.j00]],
            [[self.k11, self.k10], [self.k10, self.k00]],
        )
    }
}

/// `J_ij = int phi(p + s_i gt) phi(p + s_j gt) dp` and `K_ij` with an extra
/// factor `p`, by direct quadrature.
pub fn oracle_kj<T: Real>(
    m: &MeterProfile<T>,
    c: CouplingSchedule<T>,
    q: &QuadratureSpec<T>,
) -> Result<OracleIntegrals<T>> {
    let sigma = m.sigma().ok_or(WvaError::UnboundedMeter)?;
    let (p0, gt) = (m.p0(), c.gt());
    let reach = q.half_width * sigma + T::two() * gt;
    let (a, b) = (p0 - reach, p0 + reach);
    let phi1 = |p: T| gaussian_amplitude(p0, sigma, p + gt);
    let phi0 = |p: T| gaussian_amplitude(p0, sigma, p - gt);
    let n = q.nodes;
    Ok(OracleIntegrals {
        j11: trapezoid(a, b, n, |p| phi1(p) * phi1(p)),
        j00: trapezoid(a, b, n, |p| phi0(p) * phi0(p)),
        j10: trapezoid(a, b, n, |p| phi1(p) * phi0(p)),
        k11: trapezoid(a, b, n, |p| phi1(p) * phi1(p) * p),
        k00: trapezoid(a, b, n, |p| phi0(p) * phi0(p) * p),
        k10: trapezoid(a, b, n, |p| phi1(p) * phi0(p) * p),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleState<T = f64> {
    BellDiagonal(BellDiagonalState<T>),
    ThreeQubit(ThreeQubitPure<T>),
}

/// One configuration to be checked: initial state, target post-selection,
/// one action per control qubit, meter and coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleProblem<T = f64> {
    pub state: OracleState<T>,
    pub ps_a: PostSelection<T>,
    pub controls: Vec<ControlAction<T>>,
    pub meter: MeterProfile<T>,
    pub coupling: CouplingSchedule<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleOutcome<T = f64> {
    pub mean_p: T,
    /// `Tr_M(rho_psi_a p)`
    pub numerator: T,
    /// `Tr_M(rho_psi_a)`
    pub denominator: T,
    /// Largest imaginary part left in either trace.
    pub imaginary_residue: T,
}

impl<T: Real> OracleProblem<T> {
    fn density(&self) -> Result<(CMatrix<T>, usize)> {
        let (rho, n) = match &self.state {
            OracleState::BellDiagonal(s) => (s.density_matrix().matrix().clone(), 2),
            OracleState::ThreeQubit(s) => (s.density(), 3),
        };
        if self.controls.len() != n - 1 {
            return Err(WvaError::Config(format!(
                "{} control actions given for {} control qubits",
                self.controls.len(),
                n - 1
            )));
        }
        Ok((rho, n))
    }

    /// Target block after projecting or tracing every control, last first.
    pub fn target_block(&self) -> Result<CMatrix<T>> {
        let (mut rho, n) = self.density()?;
        for k in (1..n).rev() {
            let v;
            let action = match &self.controls[k - 1] {
                ControlAction::Project(ps) => {
                    v = ps.vector();
                    QubitReduction::Project(&v)
                }
                ControlAction::Trace => QubitReduction::Trace,
            };
            rho = rho.reduce_qubit(k + 1, k, action);
        }
        Ok(rho)
    }

    /// Weak-value result of the closed forms for the same configuration.
    pub fn closed_form(&self) -> Result<ClosedForm<T>> {
        match (&self.state, self.controls.as_slice()) {
            (OracleState::BellDiagonal(s), [ControlAction::Project(b)]) => {
                let r = weak_value_projected(s, &self.ps_a, b, &self.meter, self.coupling);
                Ok(ClosedForm {
                    mean_p: r.mean_p,
                    verdict: r.verdict,
                })
            }
            (OracleState::BellDiagonal(_), [ControlAction::Trace]) => Ok(ClosedForm {
                mean_p: Some(mean_p_traced(self.ps_a.theta(), &self.meter, self.coupling)),
                verdict: Verdict::Finite,
            }),
            (OracleState::ThreeQubit(s), [b, e]) => {
                let scenario = ThreeQubitScenario::new(s.clone(), self.ps_a, [*b, *e]);
                let r = scenario.report(&self.meter, self.coupling);
                Ok(ClosedForm {
                    mean_p: r.mean_p,
                    verdict: r.verdict,
                })
            }
            _ => Err(WvaError::Config("control actions do not match the state".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm<T> {
    pub mean_p: Option<T>,
    pub verdict: Verdict,
}

/// `<p>` at a single quadrature resolution.
pub fn oracle_evaluate<T: Real>(problem: &OracleProblem<T>, q: &QuadratureSpec<T>) -> Result<OracleOutcome<T>> {
    let tau = problem.target_block()?;
    let ints = oracle_kj(&problem.meter, problem.coupling, q)?;
    let (j, k) = ints.tables();
    let a = problem.ps_a.vector();
    let zero = Complex::new(T::zero(), T::zero());
    let (mut num, mut den) = (zero, zero);
    for i in 0..2 {
        for l in 0..2 {
            let x = a[i].conj() * tau[(i, l)] * a[l];
            num += x * k[i][l];
            den += x * j[i][l];
        }
    }
    let residue = num.im.abs().max(den.im.abs());
    let scale = num.norm().max(den.norm()).max(T::one());
    if residue > T::lit(1e-12) * scale {
        return Err(WvaError::InvalidDensity(format!(
            "imaginary residue {} in the meter trace",
            residue.to_f64_lossy()
        )));
    }
    Ok(OracleOutcome {
        mean_p: num.re / den.re,
        numerator: num.re,
        denominator: den.re,
        imaginary_residue: residue,
    })
}

/// `<p>` by quadrature, rejected when doubling the node count moves it by
/// more than `1e-8`.
pub fn oracle_mean_p<T: Real>(problem: &OracleProblem<T>, q: &QuadratureSpec<T>) -> Result<T> {
    let coarse = oracle_evaluate(problem, q)?.mean_p;
    let fine = oracle_evaluate(problem, &q.doubled())?.mean_p;
    let change = (fine - coarse).abs();
    if !(change <= T::lit(1e-8)) {
        return Err(WvaError::NotConverged {
            change: change.to_f64_lossy(),
        });
    }
    Ok(fine)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow<T = f64> {
    pub nodes: usize,
    pub mean_p: T,
    /// Change from the previous rung; absent on the first.
    pub difference: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable<T = f64> {
    pub half_width: T,
    pub rows: Vec<ConvergenceRow<T>>,
    pub passed: bool,
}

pub const DEFAULT_LADDER: [usize; 4] = [1001, 2001, 4001, 8001];

/// Runs the oracle over a ladder of node counts at a fixed width.
pub fn convergence_study<T: Real>(
    problem: &OracleProblem<T>,
    half_width: T,
    ladder: &[usize],
) -> Result<ConvergenceTable<T>> {
    let mut rows: Vec<ConvergenceRow<T>> = Vec::with_capacity(ladder.len());
    for &nodes in ladder {
        let q = QuadratureSpec::narrow(half_width, nodes)?;
        let mean_p = oracle_evaluate(problem, &q)?.mean_p;
        let difference = rows.last().map(|r| (mean_p - r.mean_p).abs());
        rows.push(ConvergenceRow {
            nodes,
            mean_p,
            difference,
        });
    }
    let passed = rows
        .last()
        .and_then(|r| r.difference)
        .is_some_and(|d| d < T::lit(1e-8));
    Ok(ConvergenceTable {
        half_width,
        rows,
        passed,
    })
}

/// Seeded random configurations: BD states with one control, GHZ and W
/// with two, `gt` in `[0, 3]`, `sigma` in `[0.3, 5]`, `p0` in `{0, 1}`.
pub fn random_corpus(seed: u64, samples: usize) -> Vec<OracleProblem<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let angle = |rng: &mut rand_chacha::ChaCha8Rng| {
        PostSelection::new(rng.random_range(0.0..=std::f64::consts::PI), rng.random_range(0.0..std::f64::consts::TAU))
            .expect("sampled in range")
    };
    let mut out = Vec::with_capacity(samples);
    for k in 0..samples {
        let ps_a = angle(&mut rng);
        let action = |rng: &mut rand_chacha::ChaCha8Rng, ps: PostSelection<f64>| {
            if rng.random_bool(0.25) {
                ControlAction::Trace
            } else {
                ControlAction::Project(ps)
            }
        };
        let (state, controls) = match k % 4 {
            0 | 1 => {
                let state = loop {
                    let c: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..=1.0));
                    if let Ok(s) = BellDiagonalState::new(c[0], c[1], c[2]) {
                        break s;
                    }
                };
                let b = angle(&mut rng);
                (OracleState::BellDiagonal(state), vec![action(&mut rng, b)])
            }
            r => {
                let init = if r == 2 { ThreeQubitPure::ghz() } else { ThreeQubitPure::w() };
                let (b, e) = (angle(&mut rng), angle(&mut rng));
                let controls = vec![action(&mut rng, b), action(&mut rng, e)];
                (OracleState::ThreeQubit(init), controls)
            }
        };
        let gt = rng.random_range(0.0..=3.0);
        let sigma = rng.random_range(0.3..=5.0);
        let p0 = if rng.random_bool(0.5) { 0.0 } else { 1.0 };
        out.push(OracleProblem {
            state,
            ps_a,
            controls,
            meter: MeterProfile::new(p0, sigma).expect("sampled in range"),
            coupling: CouplingSchedule::new(gt).expect("sampled in range"),
        });
    }
    out
}
