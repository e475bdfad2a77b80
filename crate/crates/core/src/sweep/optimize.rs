use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WvaError};
use crate::weakvalue::{Verdict, WeakValueReport};

use super::{Param, WorkingPoint};

pub const DEFAULT_GRID_POINTS: usize = 61;
const DEFAULT_TOLERANCE: f64 = 1e-6;
const MAX_GRID: usize = 5_000_000;
const MAX_REFINE_EVALUATIONS: usize = 200_000;

fn default_grid_points() -> usize {
    DEFAULT_GRID_POINTS
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeVariable {
    pub param: Param,
    pub lo: f64,
    pub hi: f64,
}

impl FreeVariable {
    pub fn new(param: Param, lo: f64, hi: f64) -> Self {
        Self { param, lo, hi }
    }

    fn physical_range(&self) -> Option<(f64, f64)> {
        match self.param {
            Param::ThetaA | Param::ThetaB => Some((0.0, PI)),
            Param::PhiA | Param::PhiB => Some((0.0, TAU)),
            Param::C1 | Param::C2 | Param::C3 => Some((-1.0, 1.0)),
            _ => None,
        }
    }
}

/// Maximise `|WV|` subject to `probability >= p_min`.
///
/// Grid resolution is per dimension; the refinement stops once every step
/// is below `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationProblem {
    pub base: WorkingPoint,
    pub free: Vec<FreeVariable>,
    pub p_min: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

impl OptimizationProblem {
    pub fn new(base: WorkingPoint, free: Vec<FreeVariable>, p_min: f64) -> Self {
        Self {
            base,
            free,
            p_min,
            grid_points: DEFAULT_GRID_POINTS,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_min > 0.0 && self.p_min <= 1.0) {
            return Err(WvaError::OutOfRange { name: "p_min", value: self.p_min, range: "(0, 1]" });
        }
        if self.grid_points < 2 {
            return Err(WvaError::Config(format!("grid needs at least 2 points, got {}", self.grid_points)));
        }
        if !(self.tolerance > 0.0) {
            return Err(WvaError::Config(format!("tolerance = {} must be positive", self.tolerance)));
        }
        for (i, v) in self.free.iter().enumerate() {
            let Some((lo, hi)) = v.physical_range() else {
                return Err(WvaError::Config(format!("{} cannot be optimised", v.param)));
            };
            if !(v.lo >= lo && v.hi <= hi && v.lo <= v.hi) {
                return Err(WvaError::Config(format!(
                    "bounds [{}, {}] for {} are outside [{lo}, {hi}]",
                    v.lo, v.hi, v.param
                )));
            }
            if self.free[..i].iter().any(|w| w.param == v.param) {
                return Err(WvaError::Config(format!("{} is listed twice", v.param)));
            }
        }
        let k = self.free.len() as u32;
        if self.grid_points.checked_pow(k).is_none_or(|n| n > MAX_GRID) {
            return Err(WvaError::Config(format!(
                "{}^{k} grid points exceed the limit of {MAX_GRID}",
                self.grid_points
            )));
        }
        // the fixed part has to make sense on its own
        let mut probe = self.base;
        for v in &self.free {
            probe.set(v.param, v.lo);
        }
        probe.meter()?;
        crate::weakvalue::CouplingSchedule::new(probe.gt)?;
        for p in [Param::ThetaA, Param::ThetaB] {
            let t = probe.get(p);
            if !(0.0..=PI).contains(&t) {
                return Err(WvaError::OutOfRange { name: "theta", value: t, range: "[0, pi]" });
            }
        }
        if !self.free.iter().any(|v| matches!(v.param, Param::C1 | Param::C2 | Param::C3)) {
            self.base.state()?;
        }
        Ok(())
    }

    /// Free variables sorted into the lexicographic tie-break order.
    fn ordered(&self) -> Vec<FreeVariable> {
        let mut v = self.free.clone();
        v.sort_by_key(|f| f.param);
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Grid,
    Refine,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub stage: Stage,
    /// free-variable values in lexicographic parameter order
    pub values: Vec<f64>,
    pub objective: Option<f64>,
    pub probability: Option<f64>,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationOutcome {
    pub best: WorkingPoint,
    pub report: WeakValueReport,
    pub objective: f64,
    pub free: Vec<Param>,
    pub grid_best: Vec<f64>,
    pub grid_objective: f64,
    pub evaluations: usize,
    pub trace: Vec<TraceEntry>,
}

struct Probe {
    entry: TraceEntry,
    report: Option<WeakValueReport>,
}

fn probe(problem: &OptimizationProblem, vars: &[FreeVariable], values: &[f64], stage: Stage) -> Probe {
    let mut p = problem.base;
    for (v, &x) in vars.iter().zip(values) {
        p.set(v.param, x);
    }
    let report = p.evaluate().ok();
    let objective = report
        .filter(|r| r.verdict == Verdict::Finite)
        .and_then(|r| r.weak_value)
        .map(f64::abs);
    let probability = report.map(|r| r.probability);
    let feasible = objective.is_some() && probability.is_some_and(|q| q >= problem.p_min);
    Probe {
        entry: TraceEntry { stage, values: values.to_vec(), objective, probability, feasible },
        report,
    }
}

fn grid_values(v: &FreeVariable, n: usize, k: usize) -> f64 {
    if k + 1 == n {
        v.hi
    } else {
        v.lo + (v.hi - v.lo) * k as f64 / (n - 1) as f64
    }
}

/// Grid scan followed by coordinate-wise pattern search.
///
/// Among grid points with equal objective the one with the lexicographically
/// smallest parameter vector wins. Refinement only accepts strict
/// improvements, so the result is never worse than the best feasible grid
/// point.
pub fn optimize_amplification(problem: &OptimizationProblem) -> Result<OptimizationOutcome> {
    problem.validate()?;
    let vars = problem.ordered();
    let n = problem.grid_points;
    let k = vars.len();
    let total = n.pow(k as u32);

    let grid: Vec<Probe> = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut values = vec![0.0; k];
            for j in (0..k).rev() {
                values[j] = grid_values(&vars[j], n, idx % n);
                idx /= n;
            }
            probe(problem, &vars, &values, Stage::Grid)
        })
        .collect();

    let mut best: Option<usize> = None;
    for (i, g) in grid.iter().enumerate() {
        if !g.entry.feasible {
            continue;
        }
        let better = match best {
            None => true,
            Some(b) => g.entry.objective > grid[b].entry.objective,
        };
        if better {
            best = Some(i);
        }
    }
    let Some(b) = best else {
        return Err(WvaError::Infeasible(format!(
            "no grid point reaches probability {} with a finite weak value",
            problem.p_min
        )));
    };

    let grid_best = grid[b].entry.values.clone();
    let grid_objective = grid[b].entry.objective.expect("feasible");
    let mut x = grid_best.clone();
    let mut fx = grid_objective;
    let mut report = grid[b].report.expect("feasible");
    let mut trace: Vec<TraceEntry> = grid.into_iter().map(|g| g.entry).collect();

    let mut steps: Vec<f64> = vars.iter().map(|v| (v.hi - v.lo) / (n - 1) as f64).collect();
    let mut evaluations = 0;
    while steps.iter().any(|&s| s >= problem.tolerance) && evaluations < MAX_REFINE_EVALUATIONS {
        let mut improved = false;
        for j in 0..k {
            for dir in [-1.0, 1.0] {
                let cand = (x[j] + dir * steps[j]).clamp(vars[j].lo, vars[j].hi);
                if cand == x[j] {
                    continue;
                }
                let mut y = x.clone();
                y[j] = cand;
                let p = probe(problem, &vars, &y, Stage::Refine);
                evaluations += 1;
                let accept = p.entry.feasible && p.entry.objective.is_some_and(|f| f > fx);
                if accept {
                    x = y;
                    fx = p.entry.objective.expect("feasible");
                    report = p.report.expect("feasible");
                    improved = true;
                }
                trace.push(p.entry);
                if accept {
                    break;
                }
            }
        }
        if !improved {
            steps.iter_mut().for_each(|s| *s *= 0.5);
        }
    }

    let mut best = problem.base;
    for (v, &val) in vars.iter().zip(&x) {
        best.set(v.param, val);
    }
    Ok(OptimizationOutcome {
        best,
        report,
        objective: fx,
        free: vars.iter().map(|v| v.param).collect(),
        grid_best,
        grid_objective,
        evaluations: total + evaluations,
        trace,
    })
}
