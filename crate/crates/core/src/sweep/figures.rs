use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::correlations::correlation_report;
use crate::error::{Result, WvaError};
use crate::states::{BellDiagonalState, PostSelection};
use crate::weakvalue::{amplification_threshold_gt, asymptotic_weak_value, ThresholdModel};

use super::{verdict_name, Axis, Cell, Dataset, Param, WorkingPoint, VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureId {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig5Inset,
}

impl FigureId {
    pub const ALL: [FigureId; 5] = [
        FigureId::Fig2,
        FigureId::Fig3,
        FigureId::Fig4,
        FigureId::Fig5,
        FigureId::Fig5Inset,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig5Inset => "fig5_inset",
        }
    }

    /// Overridable keys and their defaults.
    pub fn defaults(self) -> &'static [(&'static str, f64)] {
        match self {
            FigureId::Fig2 => &[("theta_a", PI / 3.0), ("points", 181.0)],
            FigureId::Fig3 => &[("theta_a", PI / 10.0), ("points", 101.0)],
            FigureId::Fig4 => &[
                ("c1", -0.95),
                ("c2", -0.95),
                ("c3", -0.9),
                ("phi_a", FRAC_PI_4),
                ("phi_b", FRAC_PI_4),
                ("points", 91.0),
            ],
            FigureId::Fig5 => &[
                ("theta_a", 1.4),
                ("theta_b", 1.4),
                ("delta", PI),
                ("sigma_1", 0.5),
                ("sigma_2", 1.5),
                ("gt_max", 3.0),
                ("points", 301.0),
            ],
            FigureId::Fig5Inset => &[
                ("theta_a", 1.4),
                ("theta_b", 1.4),
                ("delta", PI),
                ("gt", 1.5),
                ("r_max", 3.0),
                ("points", 301.0),
            ],
        }
    }

    /// Column names and the formula behind each.
    pub fn columns(self) -> &'static [(&'static str, &'static str)] {
        const WV: &str = "(cos tb + cos ta) / (1 + cos ta cos tb + J10 sin ta sin tb cos delta)";
        const VERDICT: &str = "finite | divergent | indeterminate";
        match self {
            FigureId::Fig2 => &[
                ("theta_b", "control polar angle, [0, pi]"),
                ("weak_value", "weak limit of the Bell form, phi_a = delta, phi_b = 0"),
                ("probability", "(1 + cos ta cos tb + sin ta sin tb cos delta) / 4"),
                ("verdict", VERDICT),
            ],
            FigureId::Fig3 => &[
                ("c", "Werner weight, c1 = c2 = c3 = -c"),
                ("weak_value_theta_b_pi_2", "(cos ta - c cos tb) / (1 - c cos ta cos tb - c sin ta sin tb), tb = pi/2"),
                ("weak_value_theta_b_pi_4", "same with tb = pi/4"),
                ("concurrence", "max(0, (3c - 1) / 2)"),
                ("eof", "h((1 + sqrt(1 - C^2)) / 2), bits"),
                ("discord", "mutual information - max classical correlation, bits"),
            ],
            FigureId::Fig4 => &[
                ("theta_a", "target polar angle, [0, pi]"),
                ("theta_b", "control polar angle, [0, pi]"),
                ("weak_value", "(c3 cos tb + cos ta) / (1 + c3 cos ta cos tb + sin ta sin tb (c1 cos pa cos pb + c2 sin pa sin pb))"),
                ("probability", "denominator / 4"),
                ("verdict", VERDICT),
            ],
            FigureId::Fig5 => &[
                ("gt", "coupling, [0, gt_max]"),
                ("weak_value_sigma_1", WV),
                ("weak_value_sigma_2", WV),
            ],
            FigureId::Fig5Inset => &[
                ("r", "squeezing, [0, r_max]"),
                ("sigma", "e^r / 2"),
                ("weak_value", WV),
            ],
        }
    }

    fn notes(self) -> &'static str {
        match self {
            FigureId::Fig2 => {
                "theta_a defaults to pi/3, which places the divergence at theta_b = 2pi/3; other target angles are an override away"
            }
            FigureId::Fig3 => "concurrence vanishes for c <= 1/3 while the two weak-value columns still differ",
            FigureId::Fig4 => "raw weak values; non-finite cells are flagged in verdict and left empty",
            FigureId::Fig5 => "J10 = exp(-gt^2 / (2 sigma^2))",
            FigureId::Fig5Inset => "sigma = e^r / 2; crossing_r is where |weak_value| = 1",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = WvaError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        FigureId::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| WvaError::Config(format!("unknown figure `{s}`")))
    }
}

/// Figure parameters to replace, by key. Keys not known to the figure are
/// rejected.
pub type Overrides = BTreeMap<String, f64>;

const MAX_POINTS: usize = 100_000;

fn resolve(id: FigureId, overrides: &Overrides) -> Result<BTreeMap<String, f64>> {
    let mut cfg: BTreeMap<String, f64> = id.defaults().iter().map(|&(k, v)| (k.to_string(), v)).collect();
    for (k, &v) in overrides {
        let Some(slot) = cfg.get_mut(k) else {
            let known: Vec<&str> = id.defaults().iter().map(|d| d.0).collect();
            return Err(WvaError::Config(format!(
                "{id} has no parameter `{k}` (known: {})",
                known.join(", ")
            )));
        };
        if !v.is_finite() {
            return Err(WvaError::Config(format!("{k} = {v} is not finite")));
        }
        *slot = v;
    }
    let points = cfg["points"];
    if points.fract() != 0.0 || points < 2.0 || points > MAX_POINTS as f64 {
        return Err(WvaError::Config(format!(
            "points = {points} must be an integer in [2, {MAX_POINTS}]"
        )));
    }
    for key in ["gt_max", "r_max", "sigma_1", "sigma_2"] {
        if let Some(&v) = cfg.get(key) {
            if v <= 0.0 {
                return Err(WvaError::Config(format!("{key} = {v} must be positive")));
            }
        }
    }
    if let Some(&gt) = cfg.get("gt") {
        if gt < 0.0 {
            return Err(WvaError::Config(format!("gt = {gt} must be non-negative")));
        }
    }
    Ok(cfg)
}

/// Regenerates the data behind one figure.
pub fn figure_dataset(id: FigureId, overrides: &Overrides) -> Result<Dataset> {
    let cfg = resolve(id, overrides)?;
    let n = cfg["points"] as usize;
    let mut extra = serde_json::Map::new();
    let rows = match id {
        FigureId::Fig2 => {
            let ta = cfg["theta_a"];
            let axis = Axis::new(Param::ThetaB, 0.0, PI, n)?;
            par_rows(n, |k| {
                let tb = axis.value(k);
                let rep = WorkingPoint::bell(ta, PI, tb, 0.0).evaluate()?;
                Ok(vec![
                    Cell::Num(tb),
                    Cell::opt(rep.weak_value),
                    Cell::Num(rep.probability),
                    Cell::Text(verdict_name(rep.verdict).into()),
                ])
            })?
        }
        FigureId::Fig3 => {
            let ta = cfg["theta_a"];
            let axis = Axis::new(Param::C1, 0.0, 1.0, n)?;
            par_rows(n, |k| {
                let c = axis.value(k);
                let werner = WorkingPoint { c: [-c, -c, -c], ..WorkingPoint::bell(ta, 0.0, 0.0, 0.0) };
                let half = werner.with(Param::ThetaB, FRAC_PI_2).evaluate()?;
                let quarter = werner.with(Param::ThetaB, FRAC_PI_4).evaluate()?;
                let corr = correlation_report(&BellDiagonalState::werner(c)?);
                Ok(vec![
                    Cell::Num(c),
                    Cell::opt(half.weak_value),
                    Cell::opt(quarter.weak_value),
                    Cell::Num(corr.concurrence),
                    Cell::Num(corr.eof),
                    Cell::Num(corr.quantum_discord),
                ])
            })?
        }
        FigureId::Fig4 => {
            let base = WorkingPoint {
                c: [cfg["c1"], cfg["c2"], cfg["c3"]],
                ..WorkingPoint::bell(0.0, cfg["phi_a"], 0.0, cfg["phi_b"])
            };
            base.state()?;
            let axis = Axis::new(Param::ThetaA, 0.0, PI, n)?;
            let rows = par_rows(n * n, |i| {
                let (ta, tb) = (axis.value(i / n), axis.value(i % n));
                let rep = base.with(Param::ThetaA, ta).with(Param::ThetaB, tb).evaluate()?;
                Ok(vec![
                    Cell::Num(ta),
                    Cell::Num(tb),
                    Cell::opt(rep.weak_value),
                    Cell::Num(rep.probability),
                    Cell::Text(verdict_name(rep.verdict).into()),
                ])
            })?;
            let flagged = rows.iter().filter(|r| r[2] == Cell::Empty).count();
            extra.insert("non_finite_cells".into(), json!(flagged));
            rows
        }
        FigureId::Fig5 => {
            let base = WorkingPoint::bell(cfg["theta_a"], cfg["delta"], cfg["theta_b"], 0.0);
            let (s1, s2) = (cfg["sigma_1"], cfg["sigma_2"]);
            let cfg0 = base.config()?;
            extra.insert("asymptote".into(), json!(asymptotic_weak_value(&cfg0)));
            extra.insert("weak_limit".into(), json!(cfg0.report().weak_value));
            let axis = Axis::new(Param::Gt, 0.0, cfg["gt_max"], n)?;
            par_rows(n, |k| {
                let gt = axis.value(k);
                let at = |s: f64| base.with(Param::Gt, gt).with(Param::Sigma, s).evaluate();
                Ok(vec![Cell::Num(gt), Cell::opt(at(s1)?.weak_value), Cell::opt(at(s2)?.weak_value)])
            })?
        }
        FigureId::Fig5Inset => {
            let (ta, tb, delta, gt) = (cfg["theta_a"], cfg["theta_b"], cfg["delta"], cfg["gt"]);
            let base = WorkingPoint::bell(ta, delta, tb, 0.0).with(Param::Gt, gt);
            base.config()?;
            extra.insert("crossing_r".into(), json!(fig5_inset_crossing(ta, tb, delta, gt).ok()));
            let axis = Axis::new(Param::R, 0.0, cfg["r_max"], n)?;
            par_rows(n, |k| {
                let r = axis.value(k);
                let p = base.with(Param::R, r);
                Ok(vec![Cell::Num(r), Cell::Num(p.get(Param::Sigma)), Cell::opt(p.evaluate()?.weak_value)])
            })?
        }
    };
    let mut meta = serde_json::Map::new();
    meta.insert("figure".into(), json!(id.name()));
    meta.insert("version".into(), json!(VERSION));
    meta.insert("config".into(), json!(cfg));
    meta.insert("notes".into(), json!(id.notes()));
    meta.extend(extra);
    Ok(Dataset {
        meta: serde_json::Value::Object(meta),
        columns: id.columns().iter().map(|c| c.0.to_string()).collect(),
        rows,
    })
}

fn par_rows(n: usize, f: impl Fn(usize) -> Result<Vec<Cell>> + Sync + Send) -> Result<Vec<Vec<Cell>>> {
    (0..n).into_par_iter().map(f).collect()
}

/// Squeezing `r` at which `|WV| = 1` for the Bell configuration at coupling
/// `gt`.
///
/// The threshold coupling is linear in `sigma`, so with `k = gt_c(sigma = 1)`
/// the crossing sits at `sigma = gt / k`, i.e. `r = ln(2 gt / k)`.
pub fn fig5_inset_crossing(theta_a: f64, theta_b: f64, delta: f64, gt: f64) -> Result<f64> {
    if !(gt > 0.0) {
        return Err(WvaError::NoThreshold(format!("gt = {gt} never decoheres the target")));
    }
    let model = ThresholdModel::Projected {
        state: BellDiagonalState::bell_phi_plus(),
        ps_a: PostSelection::wrapped(theta_a, delta)?,
        ps_b: PostSelection::new(theta_b, 0.0)?,
    };
    let k = amplification_threshold_gt(&model, 1.0)?;
    Ok((2.0 * gt / k).ln())
}
