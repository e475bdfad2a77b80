//! The `wva` command-line tool.
//!
//! Exit codes: 0 success, 1 other failure (no threshold, infeasible
//! problem, ...), 2 configuration error, 3 only divergent or indeterminate
//! results, 4 oracle check failed.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::correlations::correlation_report;
use crate::error::{Result, WvaError};
use crate::oracle::{oracle_mean_p, random_corpus, OracleProblem, OracleState, QuadratureSpec};
use crate::multiqubit::ControlAction;
use crate::sweep::{
    figure_dataset, optimize_amplification, threshold_curve, verdict_name, Axis, Cell, Column, Dataset,
    FigureId, FreeVariable, OptimizationProblem, OutputFormat, Overrides, Param, SweepPlan, VERSION,
};
use crate::weakvalue::{
    sensitivity_report, DetectionReading, ThresholdModel, Verdict, WeakValueReport,
};

mod config;

pub use config::{parse_angle, ControlKind, MeterChoice, RunConfig, StateArgs, StateSpec};
use config::{parse_bounds, parse_number, split_assignment};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGENT: i32 = 3;
pub const EXIT_ORACLE: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "wva",
    version,
    about = "Weak-value amplification of a target qubit steered by correlated control qubits",
    after_help = "Angles accept radians or multiples of pi (pi/2, 2pi/3, -pi/4).\n\
                  Flags override values from --config, a TOML file with the same keys\n\
                  (optionally grouped under [state], [angles] and [meter]).\n\
                  WVA_THREADS caps the number of worker threads."
)]
pub struct Cli {
    /// TOML file with default flag values
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the result here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output encoding (csv or json); each command has its own default
    #[arg(long, global = true, value_parser = parse_format)]
    pub format: Option<OutputFormat>,
    #[command(subcommand)]
    pub command: Command,
}

fn parse_format(s: &str) -> std::result::Result<OutputFormat, String> {
    s.parse().map_err(|e: WvaError| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Weak value, mean momentum and post-selection probability at one point
    #[command(after_help = EVAL_HELP)]
    Eval(EvalArgs),
    /// Regenerate the data behind a figure
    #[command(after_help = figure_help())]
    Figure(FigureArgs),
    /// Cartesian sweep over one or more parameters
    #[command(after_help = sweep_help())]
    Sweep(SweepArgs),
    /// Smallest coupling gt at which |weak value| drops to 1, per meter width
    #[command(after_help = THRESHOLD_HELP)]
    Threshold(ThresholdArgs),
    /// Concurrence, entanglement of formation and discord of a Bell-diagonal state
    #[command(after_help = CORRELATIONS_HELP)]
    Correlations(CorrelationsArgs),
    /// Compare closed-form <p> with direct quadrature on random configurations
    #[command(name = "oracle-check", after_help = ORACLE_HELP)]
    OracleCheck(OracleArgs),
    /// Maximise |weak value| subject to a minimum post-selection probability
    #[command(after_help = OPTIMIZE_HELP)]
    Optimize(OptimizeArgs),
    /// Response of the weak value to a small rotation of the control post-selection
    #[command(after_help = SENSITIVITY_HELP)]
    Sensitivity(SensitivityArgs),
}

const EVAL_HELP: &str = "Output fields:\n  \
    weak_value   two qubits: (c3 cos tb + cos ta) / D,\n               \
    D = 1 + c3 cos ta cos tb + J10 sin ta sin tb (c1 cos pa cos pb + c2 sin pa sin pb),\n               \
    J10 = exp(-gt^2 / (2 sigma^2)), 1 in the weak limit;\n               \
    three qubits: Tr(sz tau) / <a|tau|a> with J10 on the coherence of tau\n  \
    mean_p       p0 - gt * weak_value\n  \
    probability  post-selection probability in the weak limit (D / 4 with J10 = 1)\n  \
    denominator  D\n  \
    divergent    |D| < 1e-12 with a nonzero numerator\n  \
    indeterminate  numerator and denominator both below 1e-12\n\
    Exit code 3 when the result is not finite.";

const THRESHOLD_HELP: &str = "Columns:\n  \
    sigma  meter width\n  \
    gt_c   smallest gt with |WV(J10)| = 1, J10 = exp(-gt^2 / (2 sigma^2))\n  \
    ratio  gt_c / sigma, constant because WV depends on gt / sigma only\n\
    --uncorrelated uses WV = cos ta / (1 + J10 sin ta cos pa).";

const CORRELATIONS_HELP: &str = "Output fields:\n  \
    concurrence  max(0, 2 lambda_max - 1)\n  \
    eof          h((1 + sqrt(1 - C^2)) / 2), bits\n  \
    mutual_information  S(rho_a) + S(rho_b) - S(rho), bits\n  \
    classical_correlation  1 - h((1 + max|c_j|) / 2), bits\n  \
    quantum_discord  mutual_information - classical_correlation";

const ORACLE_HELP: &str = "Columns:\n  \
    state, theta_a, phi_a, control_b, control_e, p0, sigma, gt  the configuration\n  \
    closed_form  p0 - gt * WV from the closed forms\n  \
    oracle       Tr(rho_a p) / Tr(rho_a) by trapezoid quadrature over p\n  \
    abs_diff     |closed_form - oracle|\n  \
    pass         abs_diff <= tolerance\n\
    Configurations without a finite closed form are excluded. Exit code 4 on any failure.";

const OPTIMIZE_HELP: &str = "Objective |WV| with WV the two-qubit weak value, constraint\n\
    probability >= p_min. Free variables: theta_a, phi_a, theta_b, phi_b, c1, c2, c3,\n\
    given as --free name=lo:hi. A grid scan (--grid-points per dimension) is\n\
    refined by coordinate search down to --tolerance.";

const SENSITIVITY_HELP: &str = "Output fields:\n  \
    derivative  dWV/dtb = (N' D - N D') / D^2, N' = -c3 sin tb,\n              \
    D' = -c3 cos ta sin tb + J10 sin ta cos tb (c1 cos pa cos pb + c2 sin pa sin pb)\n  \
    eta         |WV(tb0 + dtb) - WV(tb0)| / |WV(tb0)|\n  \
    resolvable_angle  relative: limit |WV| / |WV'|; absolute: limit / |WV'|";

fn figure_help() -> String {
    let mut s = String::from("Figures and columns (override parameters with --set key=value):\n");
    for id in FigureId::ALL {
        let keys: Vec<&str> = id.defaults().iter().map(|d| d.0).collect();
        s.push_str(&format!("  {}  [{}]\n", id.name(), keys.join(", ")));
        for (name, formula) in id.columns() {
            s.push_str(&format!("    {name}: {formula}\n"));
        }
    }
    s
}

fn sweep_help() -> String {
    let mut s = String::from("Axes: --axis name=start:stop:steps, names ");
    let names: Vec<&str> = Param::ALL.iter().map(|p| p.name()).collect();
    s.push_str(&names.join(", "));
    s.push_str(".\nColumns:\n");
    for c in Column::ALL {
        s.push_str(&format!("  {}: {}\n", c.name(), c.formula()));
    }
    s
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub state: StateArgs,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    /// fig2, fig3, fig4, fig5 or fig5_inset
    pub figure: String,
    /// Override a figure parameter, e.g. --set theta_a=pi/4
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Swept parameter, e.g. --axis theta_b=0:pi:181 (repeat for a grid)
    #[arg(long = "axis", value_name = "NAME=START:STOP:STEPS", required = true)]
    pub axes: Vec<String>,
    /// Output columns
    #[arg(long, value_delimiter = ',', default_value = "weak_value,probability,verdict")]
    pub columns: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Meter widths, comma separated
    #[arg(long, value_delimiter = ',', value_parser = parse_number)]
    pub sigmas: Vec<f64>,
    /// Evenly spaced meter widths start:stop:steps
    #[arg(long, conflicts_with = "sigmas")]
    pub sigma_range: Option<String>,
    /// Target without correlations (control ignored)
    #[arg(long)]
    pub uncorrelated: bool,
}

#[derive(Debug, Args)]
pub struct CorrelationsArgs {
    #[command(flatten)]
    pub state: StateArgs,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Quadrature nodes (odd)
    #[arg(long, default_value_t = 4001)]
    pub nodes: usize,
    /// Integration half-width in units of sigma
    #[arg(long, default_value_t = 12.0)]
    pub half_width: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Free variable with bounds, e.g. --free theta_a=0:pi
    #[arg(long = "free", value_name = "NAME=LO:HI")]
    pub free: Vec<String>,
    /// Minimum post-selection probability
    #[arg(long, value_parser = parse_number)]
    pub p_min: f64,
    #[arg(long, default_value_t = crate::sweep::DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    /// Include every evaluated point in the output
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Rotation of the control polar angle
    #[arg(long, value_parser = parse_angle, default_value = "0.001", allow_hyphen_values = true)]
    pub delta_theta_b: f64,
    /// Smallest detectable change of the pointer reading
    #[arg(long, value_parser = parse_number, default_value_t = 0.01)]
    pub detection_limit: f64,
    #[arg(long, value_enum, default_value_t = Reading::Relative)]
    pub reading: Reading,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Reading {
    Relative,
    Absolute,
}

/// Result of one command: bytes to emit and the exit code.
struct Output {
    body: Vec<u8>,
    code: i32,
}

fn exit_code(e: &WvaError) -> i32 {
    match e {
        WvaError::Config(_)
        | WvaError::OutOfRange { .. }
        | WvaError::InvalidBellDiagonal { .. }
        | WvaError::InvalidDensity(_)
        | WvaError::NotNormalised(_)
        | WvaError::AmbiguousMeter
        | WvaError::UnboundedMeter => EXIT_CONFIG,
        WvaError::Divergent(_) => EXIT_DIVERGENT,
        _ => EXIT_FAILURE,
    }
}

/// Runs the tool on `args` (including the program name) and returns the
/// exit code. Results go to `stdout` or `--out`, diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_CONFIG;
    }
    let out = match dispatch(&cli, stderr) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    let written = match &cli.out {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            w.write_all(&out.body)?;
            w.flush()
        }),
        None => stdout.write_all(&out.body).and_then(|_| stdout.flush()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: cannot write output: {e}");
        return EXIT_FAILURE;
    }
    out.code
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("WVA_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| WvaError::Config(format!("WVA_THREADS = `{v}` is not a positive integer")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn state_args(cli: &Cli, args: &StateArgs) -> Result<RunConfig> {
    let mut merged = args.clone();
    if let Some(path) = &cli.config {
        merged.merge_file(path)?;
    }
    merged.resolve()
}

fn dispatch(cli: &Cli, stderr: &mut dyn Write) -> Result<Output> {
    match &cli.command {
        Command::Eval(a) => eval(cli, a),
        Command::Figure(a) => {
            let id: FigureId = a.figure.parse()?;
            let mut overrides = Overrides::new();
            for s in &a.set {
                let (k, v) = split_assignment(s).map_err(WvaError::Config)?;
                let v = parse_angle(v).map_err(WvaError::Config)?;
                if overrides.insert(k.clone(), v).is_some() {
                    return Err(WvaError::Config(format!("`{k}` is set twice")));
                }
            }
            dataset_output(&figure_dataset(id, &overrides)?, cli.format.unwrap_or_default())
        }
        Command::Sweep(a) => sweep(cli, a),
        Command::Threshold(a) => threshold(cli, a),
        Command::Correlations(a) => {
            let cfg = state_args(cli, &a.state)?;
            let state = cfg.bd_state()?;
            let report = correlation_report(&state);
            let value = json!({
                "c": state.coefficients(),
                "eigenvalues": state.eigenvalues(),
                "correlations": report,
            });
            match cli.format.unwrap_or(OutputFormat::Json) {
                OutputFormat::Json => json_output(&value, EXIT_OK),
                OutputFormat::Csv => {
                    let c = state.coefficients();
                    let d = Dataset {
                        meta: json!({"kind": "correlations", "version": VERSION}),
                        columns: ["c1", "c2", "c3", "concurrence", "eof", "mutual_information", "classical_correlation", "quantum_discord"]
                            .map(String::from)
                            .to_vec(),
                        rows: vec![[c[0], c[1], c[2], report.concurrence, report.eof, report.mutual_information, report.classical_correlation, report.quantum_discord]
                            .map(Cell::Num)
                            .to_vec()],
                    };
                    dataset_output(&d, OutputFormat::Csv)
                }
            }
        }
        Command::OracleCheck(a) => oracle_check(cli, a, stderr),
        Command::Optimize(a) => optimize(cli, a),
        Command::Sensitivity(a) => {
            let cfg = state_args(cli, &a.state)?;
            let config = cfg.working_point(&[])?.config()?;
            let reading = match a.reading {
                Reading::Relative => DetectionReading::Relative,
                Reading::Absolute => DetectionReading::Absolute,
            };
            let report = sensitivity_report(&config, a.delta_theta_b, a.detection_limit, reading)?;
            json_output(&json!({"input": cfg, "sensitivity": report}), EXIT_OK)
        }
    }
}

fn json_output<S: Serialize>(value: &S, code: i32) -> Result<Output> {
    let mut body = serde_json::to_vec_pretty(value).map_err(|e| WvaError::Config(e.to_string()))?;
    body.push(b'\n');
    Ok(Output { body, code })
}

/// Exit code 3 when every weak-value cell is empty.
fn dataset_output(d: &Dataset, format: OutputFormat) -> Result<Output> {
    let mut body = Vec::new();
    d.write(&mut body, format)?;
    let wv_cols: Vec<usize> = d
        .columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.starts_with("weak_value"))
        .map(|(i, _)| i)
        .collect();
    let all_nonfinite = !wv_cols.is_empty()
        && !d.rows.is_empty()
        && d.rows.iter().all(|r| wv_cols.iter().all(|&i| r[i] == Cell::Empty));
    Ok(Output { body, code: if all_nonfinite { EXIT_DIVERGENT } else { EXIT_OK } })
}

fn eval(cli: &Cli, a: &EvalArgs) -> Result<Output> {
    let cfg = state_args(cli, &a.state)?;
    let report: WeakValueReport = match cfg.state {
        StateSpec::ThreeQubit(_) => {
            let scenario = cfg.scenario()?;
            scenario.report(&cfg.meter_profile()?, crate::weakvalue::CouplingSchedule::new(cfg.gt)?)
        }
        _ => cfg.working_point(&[])?.evaluate()?,
    };
    let code = if report.verdict == Verdict::Finite { EXIT_OK } else { EXIT_DIVERGENT };
    match cli.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => {
            let mut v = serde_json::to_value(report).expect("report serialises");
            v["verdict"] = json!(verdict_name(report.verdict));
            v["input"] = serde_json::to_value(cfg).expect("config serialises");
            json_output(&v, code)
        }
        OutputFormat::Csv => {
            let d = Dataset {
                meta: json!({"kind": "eval", "version": VERSION, "config": cfg}),
                columns: ["weak_value", "mean_p", "probability", "verdict", "denominator"].map(String::from).to_vec(),
                rows: vec![vec![
                    Cell::opt(report.weak_value),
                    Cell::opt(report.mean_p),
                    Cell::Num(report.probability),
                    Cell::Text(verdict_name(report.verdict).into()),
                    Cell::Num(report.denominator),
                ]],
            };
            let mut out = dataset_output(&d, OutputFormat::Csv)?;
            out.code = code;
            Ok(out)
        }
    }
}

fn parse_axis(s: &str) -> Result<Axis> {
    let (name, spec) = split_assignment(s).map_err(WvaError::Config)?;
    let param: Param = name.parse()?;
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, steps] = parts.as_slice() else {
        return Err(WvaError::Config(format!("axis `{s}` is not name=start:stop:steps")));
    };
    let start = parse_angle(start).map_err(WvaError::Config)?;
    let stop = parse_angle(stop).map_err(WvaError::Config)?;
    let steps: usize = steps
        .trim()
        .parse()
        .map_err(|_| WvaError::Config(format!("`{steps}` is not a step count")))?;
    Axis::new(param, start, stop, steps)
}

fn sweep(cli: &Cli, a: &SweepArgs) -> Result<Output> {
    let axes = a.axes.iter().map(|s| parse_axis(s)).collect::<Result<Vec<_>>>()?;
    let cfg = state_args(cli, &a.state)?;
    let swept: Vec<&str> = axes.iter().map(|x| x.param.name()).collect();
    let mut base = cfg.working_point(&swept)?;
    if axes.iter().any(|x| matches!(x.param, Param::Sigma | Param::R)) && cfg.meter == MeterChoice::WeakLimit {
        return Err(WvaError::Config("cannot sweep the meter width with --weak-limit".into()));
    }
    if cfg.sigma().is_none() {
        base.sigma = None;
    }
    let columns = a.columns.iter().map(|c| c.parse()).collect::<Result<Vec<Column>>>()?;
    let plan = SweepPlan { axes, base, columns };
    dataset_output(&plan.run()?, cli.format.unwrap_or_default())
}

fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, steps] = parts.as_slice() else {
        return Err(WvaError::Config(format!("`{s}` is not start:stop:steps")));
    };
    let start = parse_number(start).map_err(WvaError::Config)?;
    let stop = parse_number(stop).map_err(WvaError::Config)?;
    let steps: usize = steps
        .trim()
        .parse()
        .map_err(|_| WvaError::Config(format!("`{steps}` is not a step count")))?;
    Ok(Axis::new(Param::Sigma, start, stop, steps)?.values())
}

fn threshold(cli: &Cli, a: &ThresholdArgs) -> Result<Output> {
    let cfg = state_args(cli, &a.state)?;
    let model = if a.uncorrelated {
        ThresholdModel::Uncorrelated { ps_a: cfg.ps_a()? }
    } else {
        ThresholdModel::Projected { state: cfg.bd_state()?, ps_a: cfg.ps_a()?, ps_b: cfg.ps_b()? }
    };
    let sigmas = match (&a.sigma_range, a.sigmas.is_empty(), cfg.sigma()) {
        (Some(r), _, _) => parse_range(r)?,
        (None, false, _) => a.sigmas.clone(),
        (None, true, Some(s)) => vec![s],
        (None, true, None) => vec![0.5, 1.5],
    };
    for &s in &sigmas {
        if !(s > 0.0) {
            return Err(WvaError::OutOfRange { name: "sigma", value: s, range: "(0, inf)" });
        }
    }
    let curve = threshold_curve(&model, &sigmas)?;
    match cli.format.unwrap_or_default() {
        OutputFormat::Csv => dataset_output(&curve.dataset(&model), OutputFormat::Csv),
        OutputFormat::Json => json_output(&curve, EXIT_OK),
    }
}

fn optimize(cli: &Cli, a: &OptimizeArgs) -> Result<Output> {
    let mut free = Vec::new();
    for s in &a.free {
        let (name, bounds) = split_assignment(s).map_err(WvaError::Config)?;
        let (lo, hi) = parse_bounds(bounds).map_err(WvaError::Config)?;
        free.push(FreeVariable::new(name.parse()?, lo, hi));
    }
    let cfg = state_args(cli, &a.state)?;
    let names: Vec<&str> = free.iter().map(|f| f.param.name()).collect();
    let problem = OptimizationProblem {
        base: cfg.working_point(&names)?,
        free,
        p_min: a.p_min,
        grid_points: a.grid_points,
        tolerance: a.tolerance,
    };
    let mut outcome = optimize_amplification(&problem)?;
    if !a.trace {
        outcome.trace.clear();
    }
    let mut v = serde_json::to_value(&outcome).expect("outcome serialises");
    if !a.trace {
        v.as_object_mut().expect("object").remove("trace");
    }
    v["problem"] = serde_json::to_value(&problem).expect("problem serialises");
    json_output(&v, EXIT_OK)
}

fn describe_control(a: &ControlAction) -> String {
    match a {
        ControlAction::Trace => "trace".into(),
        ControlAction::Project(ps) => format!("project({};{})", ps.theta(), ps.phi()),
    }
}

fn describe_state(s: &OracleState) -> String {
    match s {
        OracleState::BellDiagonal(b) => {
            let c = b.coefficients();
            format!("bd({};{};{})", c[0], c[1], c[2])
        }
        OracleState::ThreeQubit(t) => format!("{:?}", t.tag()).to_ascii_lowercase(),
    }
}

fn oracle_check(cli: &Cli, a: &OracleArgs, stderr: &mut dyn Write) -> Result<Output> {
    if a.samples == 0 {
        return Err(WvaError::Config("--samples must be positive".into()));
    }
    if !(a.tolerance > 0.0) {
        return Err(WvaError::Config("--tolerance must be positive".into()));
    }
    let q = QuadratureSpec::new(a.half_width, a.nodes)?;
    let corpus = random_corpus(a.seed, a.samples);
    let rows: Vec<Option<(OracleProblem, f64, Result<f64>)>> = corpus
        .into_par_iter()
        .map(|p| {
            let closed = p.closed_form().ok()?.mean_p?;
            let oracle = oracle_mean_p(&p, &q);
            Some((p, closed, oracle))
        })
        .collect();
    let excluded = rows.iter().filter(|r| r.is_none()).count();
    let mut max_diff: f64 = 0.0;
    let mut failures = 0;
    let mut table = Vec::new();
    for (p, closed, oracle) in rows.into_iter().flatten() {
        let (oracle_cell, diff) = match oracle {
            Ok(o) => (Cell::Num(o), (o - closed).abs()),
            Err(e) => (Cell::Text(format!("error: {e}")), f64::INFINITY),
        };
        let pass = diff <= a.tolerance;
        failures += usize::from(!pass);
        max_diff = max_diff.max(diff);
        table.push(vec![
            Cell::Text(describe_state(&p.state)),
            Cell::Num(p.ps_a.theta()),
            Cell::Num(p.ps_a.phi()),
            Cell::Text(describe_control(&p.controls[0])),
            Cell::Text(p.controls.get(1).map_or(String::new(), describe_control)),
            Cell::Num(p.meter.p0()),
            Cell::opt(p.meter.sigma()),
            Cell::Num(p.coupling.gt()),
            Cell::Num(closed),
            oracle_cell,
            Cell::Num(diff),
            Cell::Text(pass.to_string()),
        ]);
    }
    let checked = table.len();
    let d = Dataset {
        meta: json!({
            "kind": "oracle_check",
            "version": VERSION,
            "seed": a.seed,
            "samples": a.samples,
            "checked": checked,
            "excluded_non_finite": excluded,
            "nodes": a.nodes,
            "half_width": a.half_width,
            "tolerance": a.tolerance,
            "max_abs_diff": max_diff,
            "failures": failures,
        }),
        columns: [
            "state", "theta_a", "phi_a", "control_b", "control_e", "p0", "sigma", "gt", "closed_form", "oracle",
            "abs_diff", "pass",
        ]
        .map(String::from)
        .to_vec(),
        rows: table,
    };
    let _ = writeln!(
        stderr,
        "oracle-check: {checked} configurations ({excluded} excluded), max |diff| = {max_diff:e}, {failures} failures"
    );
    let mut out = dataset_output(&d, cli.format.unwrap_or_default())?;
    out.code = if failures == 0 { EXIT_OK } else { EXIT_ORACLE };
    Ok(out)
}
