//! Parameter sweeps over two-qubit working points, the figure datasets,
//! threshold curves and the constrained amplification optimiser.
//!
//! Sweeps are plumbing around the closed forms and run in `f64` only. Grid
//! points are evaluated in parallel but rows always come back in grid order,
//! so the same plan gives byte-identical output on every run.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::correlations::correlation_report;
use crate::error::{check_range, Result, WvaError};
use crate::meter::MeterProfile;
use crate::states::{BellDiagonalState, PostSelection};
use crate::weakvalue::{ControlConfig, CouplingSchedule, Verdict, WeakValueReport};

mod figures;
mod optimize;

pub use figures::{figure_dataset, fig5_inset_crossing, FigureId, Overrides};
pub use optimize::{
    optimize_amplification, FreeVariable, OptimizationOutcome, OptimizationProblem, TraceEntry,
    DEFAULT_GRID_POINTS,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Scalar knobs of a [`WorkingPoint`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    ThetaA,
    PhiA,
    ThetaB,
    PhiB,
    C1,
    C2,
    C3,
    Gt,
    Sigma,
    R,
    P0,
}

impl Param {
    pub const ALL: [Param; 11] = [
        Param::ThetaA,
        Param::PhiA,
        Param::ThetaB,
        Param::PhiB,
        Param::C1,
        Param::C2,
        Param::C3,
        Param::Gt,
        Param::Sigma,
        Param::R,
        Param::P0,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::ThetaA => "theta_a",
            Param::PhiA => "phi_a",
            Param::ThetaB => "theta_b",
            Param::PhiB => "phi_b",
            Param::C1 => "c1",
            Param::C2 => "c2",
            Param::C3 => "c3",
            Param::Gt => "gt",
            Param::Sigma => "sigma",
            Param::R => "r",
            Param::P0 => "p0",
        }
    }

    pub fn is_angle(self) -> bool {
        matches!(self, Param::ThetaA | Param::PhiA | Param::ThetaB | Param::PhiB)
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = WvaError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().replace('-', "_");
        Param::ALL
            .into_iter()
            .find(|p| p.name() == key)
            .ok_or_else(|| WvaError::Config(format!("unknown parameter `{s}`")))
    }
}

/// Flat, unvalidated binding of every parameter of a two-qubit evaluation.
/// `sigma = None` is the weak-measurement limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkingPoint {
    pub c: [f64; 3],
    pub theta_a: f64,
    pub phi_a: f64,
    pub theta_b: f64,
    pub phi_b: f64,
    pub p0: f64,
    pub sigma: Option<f64>,
    pub gt: f64,
}

impl Default for WorkingPoint {
    fn default() -> Self {
        Self::bell(0.0, 0.0, 0.0, 0.0)
    }
}

impl WorkingPoint {
    /// `|Phi+>` in the weak limit with no coupling.
    pub fn bell(theta_a: f64, phi_a: f64, theta_b: f64, phi_b: f64) -> Self {
        Self {
            c: [1.0, -1.0, 1.0],
            theta_a,
            phi_a,
            theta_b,
            phi_b,
            p0: 0.0,
            sigma: None,
            gt: 0.0,
        }
    }

    pub fn get(&self, p: Param) -> f64 {
        match p {
            Param::ThetaA => self.theta_a,
            Param::PhiA => self.phi_a,
            Param::ThetaB => self.theta_b,
            Param::PhiB => self.phi_b,
            Param::C1 => self.c[0],
            Param::C2 => self.c[1],
            Param::C3 => self.c[2],
            Param::Gt => self.gt,
            Param::Sigma => self.sigma.unwrap_or(f64::INFINITY),
            Param::R => self.sigma.map_or(f64::INFINITY, |s| (2.0 * s).ln()),
            Param::P0 => self.p0,
        }
    }

    /// Sets one parameter; `r` is stored as `sigma = e^r / 2`.
    pub fn set(&mut self, p: Param, v: f64) {
        match p {
            Param::ThetaA => self.theta_a = v,
            Param::PhiA => self.phi_a = v,
            Param::ThetaB => self.theta_b = v,
            Param::PhiB => self.phi_b = v,
            Param::C1 => self.c[0] = v,
            Param::C2 => self.c[1] = v,
            Param::C3 => self.c[2] = v,
            Param::Gt => self.gt = v,
            Param::Sigma => self.sigma = Some(v),
            Param::R => self.sigma = Some(v.exp() / 2.0),
            Param::P0 => self.p0 = v,
        }
    }

    pub fn with(mut self, p: Param, v: f64) -> Self {
        self.set(p, v);
        self
    }

    pub fn state(&self) -> Result<BellDiagonalState> {
        BellDiagonalState::new(self.c[0], self.c[1], self.c[2])
    }

    pub fn meter(&self) -> Result<MeterProfile> {
        match self.sigma {
            None => {
                check_range("p0", self.p0, true, "finite")?;
                Ok(MeterProfile::weak_limit(self.p0))
            }
            Some(s) => MeterProfile::new(self.p0, s),
        }
    }

    /// Validated configuration. Azimuths are reduced modulo `2 pi`.
    pub fn config(&self) -> Result<ControlConfig> {
        Ok(ControlConfig {
            state: self.state()?,
            ps_a: PostSelection::wrapped(self.theta_a, self.phi_a)?,
            ps_b: PostSelection::wrapped(self.theta_b, self.phi_b)?,
            meter: self.meter()?,
            coupling: CouplingSchedule::new(self.gt)?,
        })
    }

    pub fn evaluate(&self) -> Result<WeakValueReport> {
        Ok(self.config()?.report())
    }
}

/// One swept parameter: `steps` evenly spaced values from `start` to `stop`
/// inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub param: Param,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(param: Param, start: f64, stop: f64, steps: usize) -> Result<Self> {
        let axis = Self { param, start, stop, steps };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite()) || self.start == self.stop {
            return Err(WvaError::Config(format!(
                "range for {} is empty: [{}, {}]",
                self.param, self.start, self.stop
            )));
        }
        if self.steps < 2 {
            return Err(WvaError::Config(format!(
                "{} needs at least 2 steps, got {}",
                self.param, self.steps
            )));
        }
        Ok(())
    }

    /// The `k`-th grid value; the last one is exactly `stop`.
    pub fn value(&self, k: usize) -> f64 {
        if k + 1 == self.steps {
            self.stop
        } else {
            self.start + (self.stop - self.start) * k as f64 / (self.steps - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.steps).map(|k| self.value(k)).collect()
    }
}

/// Derived quantity written for every grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Column {
    WeakValue,
    MeanP,
    Probability,
    Verdict,
    Denominator,
    Concurrence,
    Eof,
    Discord,
}

impl Column {
    pub const ALL: [Column; 8] = [
        Column::WeakValue,
        Column::MeanP,
        Column::Probability,
        Column::Verdict,
        Column::Denominator,
        Column::Concurrence,
        Column::Eof,
        Column::Discord,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Column::WeakValue => "weak_value",
            Column::MeanP => "mean_p",
            Column::Probability => "probability",
            Column::Verdict => "verdict",
            Column::Denominator => "denominator",
            Column::Concurrence => "concurrence",
            Column::Eof => "eof",
            Column::Discord => "discord",
        }
    }

    /// Formula shown in the command-line help.
    pub fn formula(self) -> &'static str {
        match self {
            Column::WeakValue => {
                "(c3 cos tb + cos ta) / (1 + c3 cos ta cos tb + J10 sin ta sin tb (c1 cos pa cos pb + c2 sin pa sin pb)), J10 = exp(-gt^2 / 2 sigma^2)"
            }
            Column::MeanP => "p0 - gt * weak_value",
            Column::Probability => {
                "(1 + c3 cos ta cos tb + sin ta sin tb (c1 cos pa cos pb + c2 sin pa sin pb)) / 4"
            }
            Column::Verdict => "finite | divergent (|D| < 1e-12) | indeterminate (0/0)",
            Column::Denominator => "D above",
            Column::Concurrence => "max(0, 2 max eigenvalue - 1) of the Bell-diagonal state",
            Column::Eof => "h((1 + sqrt(1 - C^2)) / 2), bits",
            Column::Discord => "mutual information - max classical correlation, bits",
        }
    }
}

impl FromStr for Column {
    type Err = WvaError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().replace('-', "_");
        Column::ALL
            .into_iter()
            .find(|c| c.name() == key)
            .ok_or_else(|| WvaError::Config(format!("unknown column `{s}`")))
    }
}

pub fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Finite => "finite",
        Verdict::Divergent => "divergent",
        Verdict::Indeterminate => "indeterminate",
    }
}

/// Cartesian sweep of a [`WorkingPoint`]; the first axis varies slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub axes: Vec<Axis>,
    pub base: WorkingPoint,
    pub columns: Vec<Column>,
}

impl SweepPlan {
    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() {
            return Err(WvaError::Config("sweep needs at least one axis".into()));
        }
        if self.columns.is_empty() {
            return Err(WvaError::Config("sweep needs at least one output column".into()));
        }
        for (i, a) in self.axes.iter().enumerate() {
            a.validate()?;
            let meter_param = |p: Param| matches!(p, Param::Sigma | Param::R);
            if self.axes[..i]
                .iter()
                .any(|b| b.param == a.param || (meter_param(b.param) && meter_param(a.param)))
            {
                return Err(WvaError::Config(format!("{} is swept twice", a.param)));
            }
        }
        // every point is checked before any output is produced
        self.points().iter().try_for_each(|p| p.config().map(|_| ()))
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.steps).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn points(&self) -> Vec<WorkingPoint> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    fn point(&self, mut index: usize) -> WorkingPoint {
        let mut p = self.base;
        for a in self.axes.iter().rev() {
            p.set(a.param, a.value(index % a.steps));
            index /= a.steps;
        }
        p
    }

    pub fn run(&self) -> Result<Dataset> {
        self.validate()?;
        let rows = (0..self.len())
            .into_par_iter()
            .map(|i| {
                let p = self.point(i);
                let mut row: Vec<Cell> = self.axes.iter().map(|a| Cell::Num(p.get(a.param))).collect();
                row.extend(point_cells(&p, &self.columns)?);
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut columns: Vec<String> = self.axes.iter().map(|a| a.param.name().to_string()).collect();
        columns.extend(self.columns.iter().map(|c| c.name().to_string()));
        Ok(Dataset {
            meta: json!({
                "kind": "sweep",
                "version": VERSION,
                "config": serde_json::to_value(self).expect("plan serialises"),
            }),
            columns,
            rows,
        })
    }
}

fn point_cells(p: &WorkingPoint, columns: &[Column]) -> Result<Vec<Cell>> {
    let cfg = p.config()?;
    let rep = cfg.report();
    let corr = columns
        .iter()
        .any(|c| matches!(c, Column::Concurrence | Column::Eof | Column::Discord))
        .then(|| correlation_report(&cfg.state));
    Ok(columns
        .iter()
        .map(|c| match c {
            Column::WeakValue => Cell::opt(rep.weak_value),
            Column::MeanP => Cell::opt(rep.mean_p),
            Column::Probability => Cell::Num(rep.probability),
            Column::Verdict => Cell::Text(verdict_name(rep.verdict).into()),
            Column::Denominator => Cell::Num(rep.denominator),
            Column::Concurrence => Cell::Num(corr.expect("computed").concurrence),
            Column::Eof => Cell::Num(corr.expect("computed").eof),
            Column::Discord => Cell::Num(corr.expect("computed").quantum_discord),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            _ => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Num(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) => json!(x),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

/// Table with a metadata block. Rows are in grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub meta: Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = WvaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(WvaError::Config(format!("unknown format `{s}` (csv or json)"))),
        }
    }
}

impl Dataset {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric column by name; non-numeric cells come back as `None`.
    pub fn numbers(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.column(name)?;
        Some(self.rows.iter().map(|r| r[i].as_f64()).collect())
    }

    /// `# {json}` metadata line followed by an RFC 4180 table.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e: std::io::Error| WvaError::Config(format!("write failed: {e}"));
        writeln!(out, "# {}", self.meta).map_err(io)?;
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| WvaError::Config(format!("write failed: {e}"));
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
        }
        w.flush().map_err(io)
    }

    /// Array of row objects keyed by column name.
    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: serde_json::Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(r)
                    .map(|(k, v)| (k.clone(), v.to_json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        serde_json::to_writer_pretty(&mut out, &rows)
            .map_err(|e| WvaError::Config(format!("write failed: {e}")))?;
        writeln!(out).map_err(|e| WvaError::Config(format!("write failed: {e}")))
    }

    pub fn write<W: Write>(&self, out: W, format: OutputFormat) -> Result<()> {
        match format {
            OutputFormat::Csv => self.write_csv(out),
            OutputFormat::Json => self.write_json(out),
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf-8 output")
    }
}

/// `gt_c` across meter widths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdCurve {
    pub rows: Vec<ThresholdRow>,
    /// Largest relative spread of `gt_c / sigma` around the first row.
    pub max_relative_deviation: f64,
    /// `gt_c / sigma` constant to 1e-9.
    pub proportional: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub sigma: f64,
    pub gt_c: f64,
    pub ratio: f64,
}

pub const PROPORTIONALITY_TOLERANCE: f64 = 1e-9;

/// Amplification threshold at each `sigma`, in order.
pub fn threshold_curve(
    model: &crate::weakvalue::ThresholdModel<f64>,
    sigmas: &[f64],
) -> Result<ThresholdCurve> {
    if sigmas.is_empty() {
        return Err(WvaError::Config("threshold curve needs at least one sigma".into()));
    }
    let rows = sigmas
        .par_iter()
        .map(|&sigma| {
            let gt_c = crate::weakvalue::amplification_threshold_gt(model, sigma)?;
            Ok(ThresholdRow { sigma, gt_c, ratio: gt_c / sigma })
        })
        .collect::<Result<Vec<_>>>()?;
    let base = rows[0].ratio;
    let max_relative_deviation = rows
        .iter()
        .map(|r| ((r.ratio - base) / base).abs())
        .fold(0.0, f64::max);
    Ok(ThresholdCurve {
        rows,
        max_relative_deviation,
        proportional: max_relative_deviation <= PROPORTIONALITY_TOLERANCE,
    })
}

impl ThresholdCurve {
    pub fn dataset(&self, model: &crate::weakvalue::ThresholdModel<f64>) -> Dataset {
        Dataset {
            meta: json!({
                "kind": "threshold",
                "version": VERSION,
                "config": model,
                "max_relative_deviation": self.max_relative_deviation,
                "proportional": self.proportional,
            }),
            columns: vec!["sigma".into(), "gt_c".into(), "ratio".into()],
            rows: self
                .rows
                .iter()
                .map(|r| vec![Cell::Num(r.sigma), Cell::Num(r.gt_c), Cell::Num(r.ratio)])
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests;
