//! Flag parsing helpers and the merged run configuration.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use clap::Args;
use serde::Serialize;

use crate::error::{Result, WvaError};
use crate::meter::MeterProfile;
use crate::multiqubit::{ControlAction, ThreeQubitScenario};
use crate::states::{BellDiagonalState, PostSelection, ThreeQubitPure};
use crate::sweep::WorkingPoint;
use crate::weakvalue::CouplingSchedule;

/// Decimal radians or a rational multiple of pi: `pi`, `-pi/2`, `2pi/3`,
/// `0.25*pi`.
pub fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim().to_ascii_lowercase().replace(' ', "");
    let Some(at) = t.find("pi") else {
        return t.parse::<f64>().map_err(|_| format!("`{s}` is not an angle"));
    };
    let (head, tail) = (&t[..at], &t[at + 2..]);
    let head = head.strip_suffix('*').unwrap_or(head);
    let coeff = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| format!("`{s}` is not an angle"))?,
    };
    let denom = match tail {
        "" => 1.0,
        d => d
            .strip_prefix('/')
            .and_then(|d| d.parse::<f64>().ok())
            .filter(|d| *d != 0.0)
            .ok_or_else(|| format!("`{s}` is not an angle"))?,
    };
    let v = coeff * PI / denom;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not an angle"))
    }
}

pub(crate) fn parse_number(s: &str) -> std::result::Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("`{s}` is not a finite number"))
}

/// `c1,c2,c3`.
pub(crate) fn parse_triple(s: &str) -> std::result::Result<[f64; 3], String> {
    let v: Vec<f64> = s.split(',').map(parse_number).collect::<std::result::Result<_, _>>()?;
    v.try_into().map_err(|_| format!("`{s}` needs exactly three comma-separated values"))
}

/// `start:stop` with angle syntax on both ends.
pub(crate) fn parse_bounds(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("`{s}` is not start:stop"))?;
    Ok((parse_angle(a)?, parse_angle(b)?))
}

/// `name=value`.
pub(crate) fn split_assignment(s: &str) -> std::result::Result<(String, &str), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("`{s}` is not key=value"))?;
    Ok((k.trim().replace('-', "_"), v.trim()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ControlKind {
    Project,
    Trace,
}

/// Flags describing the physical setup; every field may also come from the
/// config file.
#[derive(Debug, Clone, Default, Args)]
pub struct StateArgs {
    /// Named state: bell-phi-plus, maximally-mixed, ghz or w
    #[arg(long)]
    pub state: Option<String>,
    /// Werner state with weight C (c1 = c2 = c3 = -C)
    #[arg(long, value_parser = parse_number, allow_hyphen_values = true)]
    pub werner: Option<f64>,
    /// Bell-diagonal correlation triple c1,c2,c3
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
    pub bd: Option<[f64; 3]>,
    /// Target post-selection polar angle
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta_a: Option<f64>,
    /// Target post-selection azimuth
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub phi_a: Option<f64>,
    /// Control post-selection polar angle
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta_b: Option<f64>,
    /// Control post-selection azimuth
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub phi_b: Option<f64>,
    /// Relative phase phi_a + phi_b; sets phi_a with phi_b = 0 unless those are given
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    /// Second control polar angle (three-qubit states)
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta_e: Option<f64>,
    /// Second control azimuth (three-qubit states)
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub phi_e: Option<f64>,
    /// What happens to control b of a three-qubit state
    #[arg(long, value_enum)]
    pub control_b: Option<ControlKind>,
    /// What happens to control e of a three-qubit state
    #[arg(long, value_enum)]
    pub control_e: Option<ControlKind>,
    /// Meter momentum spread
    #[arg(long, value_parser = parse_number)]
    pub sigma: Option<f64>,
    /// Meter squeezing, sigma = e^r / 2
    #[arg(long, value_parser = parse_number, allow_hyphen_values = true)]
    pub r: Option<f64>,
    /// Initial meter momentum
    #[arg(long, value_parser = parse_number, allow_hyphen_values = true)]
    pub p0: Option<f64>,
    /// Integrated coupling
    #[arg(long, value_parser = parse_number)]
    pub gt: Option<f64>,
    /// Weak-measurement limit (J10 = 1)
    #[arg(long)]
    pub weak_limit: bool,
}

const GROUPS: [&str; 3] = ["state", "meter", "angles"];

impl StateArgs {
    /// Fills every field the command line left empty from a TOML file. Keys
    /// mirror the flag names and may sit at top level or in one of the
    /// `[state]`, `[meter]` and `[angles]` tables.
    pub fn merge_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| WvaError::Config(format!("cannot read {}: {e}", path.display())))?;
        let table: toml::Table = text
            .parse()
            .map_err(|e| WvaError::Config(format!("{}: {e}", path.display())))?;
        let mut flat = BTreeMap::new();
        for (k, v) in table {
            match v {
                toml::Value::Table(inner) if GROUPS.contains(&k.as_str()) => {
                    for (ik, iv) in inner {
                        // `[state] name = ...` is the same as top-level `state = ...`
                        let key = if k == "state" && ik == "name" { "state".to_string() } else { ik };
                        insert_unique(&mut flat, key, iv)?;
                    }
                }
                toml::Value::Table(_) => {
                    return Err(WvaError::Config(format!("unknown config table [{k}]")));
                }
                v => insert_unique(&mut flat, k, v)?,
            }
        }
        for (k, v) in flat {
            self.apply_file_value(&k.replace('-', "_"), &v)?;
        }
        Ok(())
    }

    fn apply_file_value(&mut self, key: &str, v: &toml::Value) -> Result<()> {
        let bad = |what: &str| WvaError::Config(format!("config key `{key}` expects {what}"));
        let num = |v: &toml::Value| match v {
            toml::Value::Float(x) => Some(*x),
            toml::Value::Integer(i) => Some(*i as f64),
            _ => None,
        };
        let angle = |v: &toml::Value| match v {
            toml::Value::String(s) => parse_angle(s).map_err(WvaError::Config),
            v => num(v).ok_or_else(|| bad("an angle")),
        };
        let control = |v: &toml::Value| match v.as_str() {
            Some("project") => Ok(ControlKind::Project),
            Some("trace") => Ok(ControlKind::Trace),
            _ => Err(bad("\"project\" or \"trace\"")),
        };
        fn fill<T>(slot: &mut Option<T>, v: Result<T>) -> Result<()> {
            let v = v?;
            if slot.is_none() {
                *slot = Some(v);
            }
            Ok(())
        }
        match key {
            "state" => fill(&mut self.state, v.as_str().map(str::to_string).ok_or_else(|| bad("a string"))),
            "werner" => fill(&mut self.werner, num(v).ok_or_else(|| bad("a number"))),
            "bd" => fill(
                &mut self.bd,
                match v {
                    toml::Value::String(s) => parse_triple(s).map_err(WvaError::Config),
                    toml::Value::Array(a) => a
                        .iter()
                        .map(num)
                        .collect::<Option<Vec<f64>>>()
                        .and_then(|v| v.try_into().ok())
                        .ok_or_else(|| bad("three numbers")),
                    _ => Err(bad("three numbers")),
                },
            ),
            "theta_a" => fill(&mut self.theta_a, angle(v)),
            "phi_a" => fill(&mut self.phi_a, angle(v)),
            "theta_b" => fill(&mut self.theta_b, angle(v)),
            "phi_b" => fill(&mut self.phi_b, angle(v)),
            "delta" => fill(&mut self.delta, angle(v)),
            "theta_e" => fill(&mut self.theta_e, angle(v)),
            "phi_e" => fill(&mut self.phi_e, angle(v)),
            "control_b" => fill(&mut self.control_b, control(v)),
            "control_e" => fill(&mut self.control_e, control(v)),
            "sigma" => fill(&mut self.sigma, num(v).ok_or_else(|| bad("a number"))),
            "r" => fill(&mut self.r, num(v).ok_or_else(|| bad("a number"))),
            "p0" => fill(&mut self.p0, num(v).ok_or_else(|| bad("a number"))),
            "gt" => fill(&mut self.gt, num(v).ok_or_else(|| bad("a number"))),
            "weak_limit" => {
                self.weak_limit |= v.as_bool().ok_or_else(|| bad("true or false"))?;
                Ok(())
            }
            _ => Err(WvaError::Config(format!("unknown config key `{key}`"))),
        }
    }

    /// Resolves the flags into a checked configuration.
    pub fn resolve(&self) -> Result<RunConfig> {
        let state = self.state_spec()?;
        let phi_a = self.phi_a.or(self.delta).unwrap_or(0.0);
        let phi_b = self.phi_b.unwrap_or(0.0);
        let meter = match (self.sigma, self.r, self.weak_limit) {
            (Some(_), Some(_), _) => return Err(WvaError::AmbiguousMeter),
            (Some(_), None, true) | (None, Some(_), true) => {
                return Err(WvaError::Config("--weak-limit excludes --sigma and --r".into()))
            }
            (Some(s), None, false) => MeterChoice::Sigma(s),
            (None, Some(r), false) => MeterChoice::Squeeze(r),
            (None, None, true) => MeterChoice::WeakLimit,
            (None, None, false) => MeterChoice::Unset,
        };
        let three = matches!(state, StateSpec::ThreeQubit(_));
        if !three && (self.theta_e.is_some() || self.phi_e.is_some() || self.control_b.is_some() || self.control_e.is_some()) {
            return Err(WvaError::Config(
                "--theta-e, --phi-e, --control-b and --control-e need a three-qubit state".into(),
            ));
        }
        let cfg = RunConfig {
            state,
            theta_a: self.theta_a,
            phi_a,
            theta_b: self.theta_b,
            phi_b,
            theta_e: self.theta_e,
            phi_e: self.phi_e.unwrap_or(0.0),
            control_b: self.control_b.unwrap_or(ControlKind::Project),
            control_e: self.control_e.unwrap_or(ControlKind::Project),
            meter,
            p0: self.p0.unwrap_or(0.0),
            gt: self.gt.unwrap_or(0.0),
        };
        cfg.check_ranges()?;
        Ok(cfg)
    }

    fn state_spec(&self) -> Result<StateSpec> {
        let given = [self.state.is_some(), self.werner.is_some(), self.bd.is_some()];
        match given.iter().filter(|g| **g).count() {
            0 => return Err(WvaError::Config("no state given (use --state, --werner or --bd)".into())),
            1 => {}
            _ => return Err(WvaError::Config("give exactly one of --state, --werner, --bd".into())),
        }
        if let Some(c) = self.werner {
            return Ok(StateSpec::Werner(c));
        }
        if let Some(c) = self.bd {
            return Ok(StateSpec::Bd(c));
        }
        let name = self.state.as_deref().expect("counted").to_ascii_lowercase().replace('_', "-");
        Ok(match name.as_str() {
            "bell-phi-plus" | "phi-plus" | "bell" => StateSpec::BellPhiPlus,
            "maximally-mixed" => StateSpec::MaximallyMixed,
            "ghz" => StateSpec::ThreeQubit(ThreeQubitKind::Ghz),
            "w" => StateSpec::ThreeQubit(ThreeQubitKind::W),
            _ => return Err(WvaError::Config(format!("unknown state `{name}`"))),
        })
    }
}

fn insert_unique(flat: &mut BTreeMap<String, toml::Value>, k: String, v: toml::Value) -> Result<()> {
    if flat.insert(k.clone(), v).is_some() {
        return Err(WvaError::Config(format!("config key `{k}` is given twice")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThreeQubitKind {
    Ghz,
    W,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSpec {
    BellPhiPlus,
    MaximallyMixed,
    Werner(f64),
    Bd([f64; 3]),
    ThreeQubit(ThreeQubitKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeterChoice {
    Unset,
    WeakLimit,
    Sigma(f64),
    Squeeze(f64),
}

/// Merged, range-checked settings shared by the commands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunConfig {
    pub state: StateSpec,
    pub theta_a: Option<f64>,
    pub phi_a: f64,
    pub theta_b: Option<f64>,
    pub phi_b: f64,
    pub theta_e: Option<f64>,
    pub phi_e: f64,
    pub control_b: ControlKind,
    pub control_e: ControlKind,
    pub meter: MeterChoice,
    pub p0: f64,
    pub gt: f64,
}

impl RunConfig {
    fn check_ranges(&self) -> Result<()> {
        for (name, t) in [("theta_a", self.theta_a), ("theta_b", self.theta_b), ("theta_e", self.theta_e)] {
            if let Some(t) = t {
                if !(0.0..=PI).contains(&t) {
                    return Err(WvaError::OutOfRange { name, value: t, range: "[0, pi]" });
                }
            }
        }
        if let StateSpec::ThreeQubit(_) = self.state {
        } else {
            self.bd_state()?;
        }
        self.meter_profile_or_weak()?;
        CouplingSchedule::new(self.gt)?;
        Ok(())
    }

    pub fn bd_state(&self) -> Result<BellDiagonalState> {
        match self.state {
            StateSpec::BellPhiPlus => Ok(BellDiagonalState::bell_phi_plus()),
            StateSpec::MaximallyMixed => Ok(BellDiagonalState::maximally_mixed()),
            StateSpec::Werner(c) => BellDiagonalState::werner(c),
            StateSpec::Bd([a, b, c]) => BellDiagonalState::new(a, b, c),
            StateSpec::ThreeQubit(_) => Err(WvaError::Config("this command needs a two-qubit state".into())),
        }
    }

    fn meter_profile_or_weak(&self) -> Result<MeterProfile> {
        match self.meter {
            MeterChoice::Sigma(s) => MeterProfile::new(self.p0, s),
            MeterChoice::Squeeze(r) => MeterProfile::squeezed(self.p0, r),
            MeterChoice::WeakLimit | MeterChoice::Unset => Ok(MeterProfile::weak_limit(self.p0)),
        }
    }

    /// Meter for commands that evaluate a weak value; it has to be chosen.
    pub fn meter_profile(&self) -> Result<MeterProfile> {
        if self.meter == MeterChoice::Unset {
            return Err(WvaError::Config("meter not given (use --sigma, --r or --weak-limit)".into()));
        }
        self.meter_profile_or_weak()
    }

    pub fn sigma(&self) -> Option<f64> {
        match self.meter {
            MeterChoice::Sigma(s) => Some(s),
            MeterChoice::Squeeze(r) => Some(r.exp() / 2.0),
            _ => None,
        }
    }

    pub fn require(&self, name: &str, v: Option<f64>) -> Result<f64> {
        v.ok_or_else(|| WvaError::Config(format!("--{} is required", name.replace('_', "-"))))
    }

    pub fn ps_a(&self) -> Result<PostSelection> {
        PostSelection::wrapped(self.require("theta_a", self.theta_a)?, self.phi_a)
    }

    pub fn ps_b(&self) -> Result<PostSelection> {
        PostSelection::wrapped(self.require("theta_b", self.theta_b)?, self.phi_b)
    }

    /// Two-qubit working point; angles listed in `optional` may be absent and
    /// are left at zero.
    pub fn working_point(&self, optional: &[&str]) -> Result<WorkingPoint> {
        let state = self.bd_state()?;
        self.meter_profile()?;
        let angle = |name: &str, v: Option<f64>| {
            if optional.contains(&name) {
                Ok(v.unwrap_or(0.0))
            } else {
                self.require(name, v)
            }
        };
        Ok(WorkingPoint {
            c: state.coefficients(),
            theta_a: angle("theta_a", self.theta_a)?,
            phi_a: self.phi_a,
            theta_b: angle("theta_b", self.theta_b)?,
            phi_b: self.phi_b,
            p0: self.p0,
            sigma: self.sigma(),
            gt: self.gt,
        })
    }

    pub fn scenario(&self) -> Result<ThreeQubitScenario> {
        let StateSpec::ThreeQubit(kind) = self.state else {
            return Err(WvaError::Config("not a three-qubit state".into()));
        };
        let initial = match kind {
            ThreeQubitKind::Ghz => ThreeQubitPure::ghz(),
            ThreeQubitKind::W => ThreeQubitPure::w(),
        };
        let action = |kind: ControlKind, name: &str, theta: Option<f64>, phi: f64| -> Result<ControlAction> {
            Ok(match kind {
                ControlKind::Trace => ControlAction::Trace,
                ControlKind::Project => ControlAction::Project(PostSelection::wrapped(self.require(name, theta)?, phi)?),
            })
        };
        Ok(ThreeQubitScenario::new(
            initial,
            self.ps_a()?,
            [
                action(self.control_b, "theta_b", self.theta_b, self.phi_b)?,
                action(self.control_e, "theta_e", self.theta_e, self.phi_e)?,
            ],
        ))
    }
}
