use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use leviflat::bishop::{classify_point, PointType};
use leviflat::scenario::{Scenario, ScenarioKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("unknown scenario `{0}` (expected ball, perturbed-ball, weak-m2 or model-quadric)")]
    UnknownScenario(String),
    #[error("field `{field}` does not apply to scenario {scenario}")]
    Incompatible { field: &'static str, scenario: String },
    #[error("field `{field}` must be positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

/// The document as written, before defaults and validation.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: String,
    gamma: Option<f64>,
    epsilon: Option<f64>,
    m: Option<u32>,
    n_theta: Option<usize>,
    n_rho: Option<usize>,
    #[serde(alias = "N_taylor")]
    n_taylor: Option<usize>,
    newton_tol: Option<f64>,
    glue_tol: Option<f64>,
    grad_cap: Option<f64>,
    stop_at: Option<f64>,
    output_dir: Option<PathBuf>,
    seed: Option<u64>,
}

/// A validated run configuration with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: ScenarioKind,
    pub n_theta: usize,
    pub n_rho: usize,
    pub n_taylor: usize,
    pub newton_tol: f64,
    pub glue_tol: f64,
    /// Absolute gradient cap; `None` uses the continuation default.
    pub grad_cap: Option<f64>,
    /// Family parameter at which a local scenario stops.
    pub stop_at: Option<f64>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

pub const DEFAULT_OUTPUT_DIR: &str = "leviflat-out";

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    validate(raw)
}

fn positive(field: &'static str, value: f64) -> Result<f64, ConfigError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ConfigError::NonPositive { field, value })
    }
}

fn forbid<T>(field: &'static str, value: &Option<T>, scenario: &str) -> Result<(), ConfigError> {
    match value {
        Some(_) => Err(ConfigError::Incompatible { field, scenario: scenario.to_string() }),
        None => Ok(()),
    }
}

fn validate(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let name = raw.scenario.as_str();
    let scenario = match name {
        "ball" => {
            forbid("gamma", &raw.gamma, name)?;
            forbid("epsilon", &raw.epsilon, name)?;
            forbid("m", &raw.m, name)?;
            ScenarioKind::Ball
        }
        "perturbed-ball" => {
            forbid("gamma", &raw.gamma, name)?;
            forbid("m", &raw.m, name)?;
            ScenarioKind::PerturbedBall { epsilon: raw.epsilon.unwrap_or(0.05) }
        }
        "weak-m2" => {
            forbid("gamma", &raw.gamma, name)?;
            forbid("epsilon", &raw.epsilon, name)?;
            ScenarioKind::WeakM { m: raw.m.unwrap_or(2) }
        }
        "model-quadric" => {
            forbid("epsilon", &raw.epsilon, name)?;
            forbid("m", &raw.m, name)?;
            let gamma = raw.gamma.unwrap_or(0.3);
            match classify_point(gamma) {
                Ok(PointType::Elliptic) => {}
                Ok(kind) => {
                    return Err(ConfigError::Invalid {
                        field: "gamma",
                        reason: format!("gamma = {gamma} gives a {kind:?} point, an elliptic one is required"),
                    })
                }
                Err(e) => return Err(ConfigError::Invalid { field: "gamma", reason: e.to_string() }),
            }
            ScenarioKind::ModelQuadric { gamma }
        }
        other => return Err(ConfigError::UnknownScenario(other.to_string())),
    };
    let field = match scenario {
        ScenarioKind::PerturbedBall { .. } => "epsilon",
        ScenarioKind::WeakM { .. } => "m",
        _ => "scenario",
    };
    Scenario::build(scenario).map_err(|e| ConfigError::Invalid { field, reason: e.to_string() })?;

    // The local quadric family needs many more modes: its discs are strongly eccentric.
    let local = matches!(scenario, ScenarioKind::ModelQuadric { .. });
    let (nt, taylor) = if local { (256, 100) } else { (64, 24) };
    let cfg = RunConfig {
        scenario,
        n_theta: raw.n_theta.unwrap_or(nt),
        n_rho: raw.n_rho.unwrap_or(32),
        n_taylor: raw.n_taylor.unwrap_or(taylor),
        newton_tol: positive("newton_tol", raw.newton_tol.unwrap_or(1e-10))?,
        glue_tol: positive("glue_tol", raw.glue_tol.unwrap_or(1e-5))?,
        grad_cap: raw.grad_cap.map(|v| positive("grad_cap", v)).transpose()?,
        stop_at: match (raw.stop_at, local) {
            (Some(_), false) => return Err(ConfigError::Incompatible { field: "stop_at", scenario: name.into() }),
            (Some(s), true) => Some(s),
            (None, true) => Some(0.5),
            (None, false) => None,
        },
        output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
        seed: raw.seed.unwrap_or(0),
    };
    if let Some(s) = cfg.stop_at {
        if !(s > 0.0 && s <= 1.0) {
            return Err(ConfigError::Invalid { field: "stop_at", reason: format!("{s} is outside (0, 1]") });
        }
    }
    cfg.check_resolution()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn with_resolution(mut self, n_theta: usize, n_rho: usize) -> Result<Self, ConfigError> {
        self.n_theta = n_theta;
        self.n_rho = n_rho;
        self.check_resolution()?;
        Ok(self)
    }

    fn check_resolution(&self) -> Result<(), ConfigError> {
        if self.n_theta < 8 || !self.n_theta.is_multiple_of(2) {
            return Err(ConfigError::Invalid { field: "n_theta", reason: format!("{} must be even and at least 8", self.n_theta) });
        }
        if self.n_rho < 4 {
            return Err(ConfigError::Invalid { field: "n_rho", reason: format!("{} must be at least 4", self.n_rho) });
        }
        if self.n_taylor == 0 || self.n_taylor + 1 > self.n_theta / 2 {
            return Err(ConfigError::Invalid {
                field: "n_taylor",
                reason: format!("{} needs 1 <= n_taylor < n_theta / 2 = {}", self.n_taylor, self.n_theta / 2),
            });
        }
        Ok(())
    }
}

/// Parses `NT,NR`.
pub fn parse_resolution(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected NT,NR, got `{s}`"))?;
    let nt = a.trim().parse().map_err(|e| format!("n_theta: {e}"))?;
    let nr = b.trim().parse().map_err(|e| format!("n_rho: {e}"))?;
    Ok((nt, nr))
}
