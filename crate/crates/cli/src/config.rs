//! Experiment configuration, parsed from JSON with unknown keys rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use splitflow::euler::{LatticeIndex, Part};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemConfig>,
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_trials() -> u64 {
    1000
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemConfig {
    Lorenz96(LorenzConfig),
    Euler(EulerConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LorenzConfig {
    pub d: usize,
    pub beta: Beta,
    pub h: f64,
}

/// Forcing vector, or one value broadcast to every mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Beta {
    Scalar(f64),
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EulerConfig {
    pub n: usize,
    pub damping: Vec<DampingEntry>,
    /// One list of nonzero entries per forcing field.
    pub forcing: Vec<Vec<ForcingEntry>>,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DampingEntry {
    pub mode: [i64; 2],
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    A,
    B,
}

impl From<Component> for Part {
    fn from(c: Component) -> Part {
        match c {
            Component::A => Part::A,
            Component::B => Part::B,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingEntry {
    pub mode: [i64; 2],
    pub part: Component,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Simulate(SimulateConfig),
    Drift(DriftConfig),
    Entrance(EntranceConfig),
    Thermalize(ThermalizeConfig),
    ReturnTime(ReturnTimeConfig),
    TriadPortrait(PortraitConfig),
    Validate(ValidateConfig),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Simulate(_) => "simulate",
            Experiment::Drift(_) => "drift",
            Experiment::Entrance(_) => "entrance",
            Experiment::Thermalize(_) => "thermalize",
            Experiment::ReturnTime(_) => "return-time",
            Experiment::TriadPortrait(_) => "triad-portrait",
            Experiment::Validate(_) => "validate",
        }
    }
}

/// Starting point: an explicit state, or a direction (random when absent)
/// scaled so that `H(x) = level`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    #[serde(default = "one")]
    pub record_every: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftConfig {
    pub levels: Vec<f64>,
    /// Defaults to one step per field.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntranceConfig {
    pub eta: f64,
    pub levels: Vec<f64>,
    /// Lorenz only: fixed direction of the starting state. Euler runs draw
    /// a fresh uniform direction per trial.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `E < ℰ/|k|^2`.
    Below,
    /// `E > ℰ/|k|^2`.
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalizeConfig {
    pub j: [i64; 2],
    pub k: [i64; 2],
    pub enstrophy: f64,
    pub y0: f64,
    /// Starting gap is `gap_factor * zeta * delta^2`.
    pub gap_factor: f64,
    #[serde(default = "below")]
    pub side: Side,
    pub xi: f64,
    pub zeta: f64,
    pub eta: f64,
    pub h: f64,
    pub deltas: Vec<f64>,
}

fn below() -> Side {
    Side::Below
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReturnTimeConfig {
    pub level: f64,
    /// Sublevel `R`; fitted from one-step drift estimates when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    pub fit_levels: Vec<f64>,
    pub max_steps: u64,
    #[serde(default = "default_quantile")]
    pub quantile: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
}

fn default_quantile() -> f64 {
    0.99
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortraitConfig {
    pub j: [i64; 2],
    pub k: [i64; 2],
    pub initial: Vec<[f64; 3]>,
    pub t_max: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    #[serde(default = "default_states")]
    pub states: usize,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
}

fn default_states() -> usize {
    1000
}

fn default_horizon() -> f64 {
    100.0
}

pub fn lattice(m: [i64; 2]) -> LatticeIndex {
    LatticeIndex::new(m[0], m[1])
}

impl ExperimentConfig {
    /// Parses `text`, reporting the failing location and field path.
    pub fn parse(text: &str, origin: &Path) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let inner = e.inner();
            CliError::Config(format!(
                "{}:{}:{}: {}: {}",
                origin.display(),
                inner.line(),
                inner.column(),
                field_path(e.path()),
                strip_position(&inner.to_string())
            ))
        })?;
        cfg.validate().map_err(|(field, msg)| CliError::Config(format!("{}: {field}: {msg}", origin.display())))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: cannot read config: {e}", path.display())))?;
        Self::parse(&text, path)
    }

    /// Range checks that the schema alone cannot express.
    fn validate(&self) -> Result<(), (String, String)> {
        let bad = |field: &str, msg: String| Err((field.to_string(), msg));
        if self.trials == 0 {
            return bad("trials", "must be positive".into());
        }
        match &self.system {
            Some(SystemConfig::Lorenz96(l)) => {
                if l.d < 4 {
                    return bad("system.lorenz96.d", format!("must be at least 4, got {}", l.d));
                }
                if let Beta::Vector(v) = &l.beta {
                    if v.len() != l.d {
                        return bad("system.lorenz96.beta", format!("has {} entries, expected {}", v.len(), l.d));
                    }
                }
                if !(l.h > 0.0 && l.h.is_finite()) {
                    return bad("system.lorenz96.h", format!("must be positive, got {}", l.h));
                }
            }
            Some(SystemConfig::Euler(e)) => {
                if e.n < 4 {
                    return bad("system.euler.n", format!("must be at least 4, got {}", e.n));
                }
                if !(e.h > 0.0 && e.h.is_finite()) {
                    return bad("system.euler.h", format!("must be positive, got {}", e.h));
                }
            }
            None => {}
        }
        let needs_system = !matches!(self.experiment, Experiment::Thermalize(_) | Experiment::TriadPortrait(_));
        if needs_system && self.system.is_none() {
            return bad("system", format!("required by the {} experiment", self.experiment.name()));
        }
        let positive_levels = |field: &str, levels: &[f64]| {
            if levels.is_empty() {
                return bad(field, "must not be empty".into());
            }
            if let Some(l) = levels.iter().find(|l| !(**l > 1.0 && l.is_finite())) {
                return bad(field, format!("levels are values of H and must exceed 1, got {l}"));
            }
            Ok(())
        };
        match &self.experiment {
            Experiment::Simulate(s) => {
                if s.record_every == 0 {
                    return bad("experiment.simulate.record_every", "must be positive".into());
                }
                if s.x0.is_some() && s.level.is_some() {
                    return bad("experiment.simulate", "give either x0 or level, not both".into());
                }
            }
            Experiment::Drift(d) => positive_levels("experiment.drift.levels", &d.levels)?,
            Experiment::Entrance(e) => {
                positive_levels("experiment.entrance.levels", &e.levels)?;
                if !(e.eta > 0.0 && e.eta < 1.0) {
                    return bad("experiment.entrance.eta", format!("must lie in (0, 1), got {}", e.eta));
                }
            }
            Experiment::Thermalize(t) => {
                if t.deltas.is_empty() || t.deltas.iter().any(|d| !(*d > 0.0 && *d < 1.0)) {
                    return bad("experiment.thermalize.deltas", "must be a non-empty list in (0, 1)".into());
                }
                if !(t.h > 0.0) {
                    return bad("experiment.thermalize.h", format!("must be positive, got {}", t.h));
                }
            }
            Experiment::ReturnTime(r) => {
                positive_levels("experiment.return-time.fit_levels", &r.fit_levels)?;
                positive_levels("experiment.return-time.level", &[r.level])?;
                if !(r.quantile > 0.0 && r.quantile <= 1.0) {
                    return bad("experiment.return-time.quantile", format!("must lie in (0, 1], got {}", r.quantile));
                }
            }
            Experiment::TriadPortrait(p) => {
                if p.samples < 2 {
                    return bad("experiment.triad-portrait.samples", "need at least two samples".into());
                }
                if !(p.t_max > 0.0 && p.t_max.is_finite()) {
                    return bad("experiment.triad-portrait.t_max", format!("must be positive, got {}", p.t_max));
                }
            }
            Experiment::Validate(v) => {
                if v.states == 0 {
                    return bad("experiment.validate.states", "must be positive".into());
                }
            }
        }
        Ok(())
    }
}

fn field_path(path: &serde_path_to_error::Path) -> String {
    let s = path.to_string();
    if s == "." || s.is_empty() {
        "<root>".into()
    } else {
        s
    }
}

/// serde_json appends " at line L column C", which the caller already
/// reports up front.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}
