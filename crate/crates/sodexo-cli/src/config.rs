//! Scenario-config parsing: a JSON envelope (`scenario`, optional `out_dir`
//! and `seed`) around one typed parameter block per scenario. Parsing is
//! strict — unknown keys are rejected with their full path — and every block
//! is validated against the model invariants before anything runs.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use sodexo::abm::{LinkInheritance, SimConfig};
use sodexo::model::{
    DegreeDistribution, DegreeKind, DeploymentEconomics, HoneybotConfig, PopulationParams,
    SubtreeState,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub fn to_json(&self) -> String {
        let kind = match self {
            CliError::Config(_) => "config",
            CliError::Runtime(_) => "runtime",
        };
        serde_json::json!({ "error": { "kind": kind, "message": self.to_string() } }).to_string()
    }
}

fn default_horizon() -> f64 {
    200.0
}

fn default_step() -> f64 {
    0.01
}

fn default_initial_bots() -> f64 {
    50.0
}

fn default_sim_initial_bots() -> u32 {
    50
}

fn default_true() -> bool {
    true
}

/// ODE scenario: integrate the population model once per requested reserve.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeBlock {
    pub params: PopulationParams,
    /// Honeybot reserves to sweep; defaults to the single value in `params`.
    #[serde(default)]
    pub reserves: Option<Vec<f64>>,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_initial_bots")]
    pub initial_bots: f64,
}

/// Degree-sequence request resolved against `params.n_users` at build time.
pub type DistSpec = DegreeKind;

/// Simulation block shared by the `abm` and `compare` scenarios.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimBlock {
    pub params: PopulationParams,
    pub dist: DistSpec,
    pub horizon: f64,
    pub tick: f64,
    pub seed: u64,
    pub replicates: u32,
    #[serde(default = "default_true")]
    pub replacement: bool,
    #[serde(default = "default_sim_initial_bots")]
    pub initial_bots: u32,
    #[serde(default)]
    pub initial_blacklist_fraction: f64,
    #[serde(default)]
    pub link_inheritance: LinkInheritance,
}

impl SimBlock {
    pub fn build(&self, seed_override: Option<u64>) -> SimConfig {
        SimConfig {
            params: self.params.clone(),
            dist: resolve_dist(&self.dist, self.params.n_users),
            horizon: self.horizon,
            tick: self.tick,
            seed: seed_override.unwrap_or(self.seed),
            replicates: self.replicates,
            replacement: self.replacement,
            initial_bots: self.initial_bots,
            initial_blacklist_fraction: self.initial_blacklist_fraction,
            link_inheritance: self.link_inheritance,
        }
    }
}

pub fn resolve_dist(spec: &DistSpec, n_users: u64) -> DegreeDistribution {
    match *spec {
        DegreeKind::Regular { degree } => DegreeDistribution::regular(n_users, degree),
        DegreeKind::ScaleFree { gamma, d_min, d_max } => {
            DegreeDistribution::scale_free(n_users, gamma, d_min, d_max)
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbmBlock {
    pub sim: SimBlock,
    /// Optional scale-free exponent sweep; requires a scale-free `dist`.
    #[serde(default)]
    pub gammas: Option<Vec<f64>>,
    #[serde(default = "default_step")]
    pub ode_step: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackelbergBlock {
    pub subtree: SubtreeState,
    pub honeybot: HoneybotConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeployBlock {
    pub params: PopulationParams,
    pub econ: DeploymentEconomics,
    /// Maintenance costs to sweep in the closed-form CSV; defaults to the
    /// single cost in `econ`.
    #[serde(default)]
    pub taus: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareBlock {
    pub sim: SimBlock,
    #[serde(default = "default_step")]
    pub ode_step: f64,
}

#[derive(Debug)]
pub enum Scenario {
    Ode(OdeBlock),
    Abm(AbmBlock),
    Stackelberg(StackelbergBlock),
    Deploy(DeployBlock),
    Compare(CompareBlock),
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Ode(_) => "ode",
            Scenario::Abm(_) => "abm",
            Scenario::Stackelberg(_) => "stackelberg",
            Scenario::Deploy(_) => "deploy",
            Scenario::Compare(_) => "compare",
        }
    }
}

/// Parsed config plus the envelope fields and the raw document (echoed into
/// the run report as the resolved-parameter record).
#[derive(Debug)]
pub struct LoadedConfig {
    pub scenario: Scenario,
    pub out_dir: Option<String>,
    pub seed: Option<u64>,
    pub raw: serde_json::Value,
}

pub fn parse_config(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let raw: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("malformed JSON in {}: {e}", path.display())))?;
    let mut body = raw
        .as_object()
        .ok_or_else(|| CliError::Config("config root must be a JSON object".into()))?
        .clone();

    let scenario_name = match body.remove("scenario") {
        Some(serde_json::Value::String(s)) => s,
        Some(other) => {
            return Err(CliError::Config(format!(
                "scenario must be a string, got {other}"
            )))
        }
        None => return Err(CliError::Config("missing required key \"scenario\"".into())),
    };
    let out_dir = match body.remove("out_dir") {
        None => None,
        Some(serde_json::Value::String(s)) => Some(s),
        Some(other) => {
            return Err(CliError::Config(format!(
                "out_dir must be a string, got {other}"
            )))
        }
    };
    let seed = match body.remove("seed") {
        None => None,
        Some(v) => Some(v.as_u64().ok_or_else(|| {
            CliError::Config(format!("seed must be an unsigned integer, got {v}"))
        })?),
    };

    let block = serde_json::Value::Object(body);
    let scenario = match scenario_name.as_str() {
        "ode" => Scenario::Ode(parse_block(block)?),
        "abm" => Scenario::Abm(parse_block(block)?),
        "stackelberg" => Scenario::Stackelberg(parse_block(block)?),
        "deploy" => Scenario::Deploy(parse_block(block)?),
        "compare" => Scenario::Compare(parse_block(block)?),
        other => {
            return Err(CliError::Config(format!(
                "unknown scenario \"{other}\"; expected one of ode, abm, stackelberg, deploy, compare"
            )))
        }
    };

    Ok(LoadedConfig { scenario, out_dir, seed, raw })
}

fn parse_block<T: serde::de::DeserializeOwned>(value: serde_json::Value) -> Result<T, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let mut message = String::new();
        if path.is_empty() || path == "." {
            let _ = write!(message, "config error: {}", e.inner());
        } else {
            let _ = write!(message, "config error at `{path}`: {}", e.inner());
        }
        CliError::Config(message)
    })
}
