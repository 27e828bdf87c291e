use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

/// Execution mode named in a config file. The `compare` subcommand forces
/// `Compare` regardless of this field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Admm,
    Baseline,
    Oracle,
    Compare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GameKind {
    /// Seeded 20-firm, 7-market competition instance.
    CournotPreset,
    /// Fixed 16-link, 15-user congestion-pricing instance.
    RateControlPreset,
    /// Explicit quadratic game given by `q`, `r`, and the action box.
    Quadratic,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    pub kind: GameKind,
    /// Generation seed; only meaningful for `cournot-preset`.
    pub seed: Option<u64>,
    /// Rows of the interaction matrix (quadratic only).
    pub q: Option<Vec<Vec<f64>>>,
    pub r: Option<Vec<f64>>,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    /// Named preset: "fig2-ring20" or "example2-ring15".
    pub preset: Option<String>,
    /// Edge-list file with 1-based "i j" lines; relative paths resolve
    /// against the config file's directory.
    pub edges: Option<PathBuf>,
    /// Vertex count, required with `edges`.
    pub n: Option<usize>,
}

/// Consensus penalty: a number, or "auto" for 1.001 times the computed floor.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PenaltySpec {
    Fixed(f64),
    Named(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum BetaSpec {
    Scalar(f64),
    PerPlayer(Vec<f64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub c: f64,
    pub c0: PenaltySpec,
    pub beta: BetaSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSpec {
    #[serde(default = "unit_range")]
    pub own_range: (f64, f64),
    #[serde(default = "unit_range")]
    pub others_range: (f64, f64),
    #[serde(default)]
    pub seed: u64,
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec { own_range: unit_range(), others_range: unit_range(), seed: 0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoppingSpec {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: u64,
}

impl Default for StoppingSpec {
    fn default() -> Self {
        StoppingSpec { tol: default_tol(), max_iter: default_max_iter() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Trace destination; no CSV is written when absent.
    pub csv: Option<PathBuf>,
    #[serde(default = "default_record_every")]
    pub record_every: u64,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { csv: None, record_every: default_record_every() }
    }
}

/// Baseline settings; `tau` (constant step) and `a`/`b` (steps a/(k+b))
/// are mutually exclusive.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineSpec {
    pub gamma: Option<f64>,
    pub tau: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    pub tau: Option<f64>,
    #[serde(default = "default_oracle_tol")]
    pub tol: f64,
    #[serde(default = "default_oracle_max_iter")]
    pub max_iter: u64,
}

impl Default for OracleSpec {
    fn default() -> Self {
        OracleSpec { tau: None, tol: default_oracle_tol(), max_iter: default_oracle_max_iter() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub game: GameSpec,
    pub graph: GraphSpec,
    pub solver: SolverSpec,
    #[serde(default)]
    pub init: InitSpec,
    #[serde(default)]
    pub stopping: StoppingSpec,
    #[serde(default)]
    pub output: OutputSpec,
    pub baseline: Option<BaselineSpec>,
    pub oracle: Option<OracleSpec>,
}

fn unit_range() -> (f64, f64) {
    (0.0, 1.0)
}

fn default_tol() -> f64 {
    1e-8
}

fn default_max_iter() -> u64 {
    1_000_000
}

fn default_record_every() -> u64 {
    1
}

fn default_oracle_tol() -> f64 {
    1e-10
}

fn default_oracle_max_iter() -> u64 {
    10_000_000
}

fn config_err(message: impl Into<String>) -> CliError {
    CliError::Config(message.into())
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
        let mut config = Self::from_toml(&text)
            .map_err(|e| match e {
                CliError::Config(msg) => config_err(format!("{}: {}", path.display(), msg)),
                other => other,
            })?;
        if let Some(edges) = &config.graph.edges {
            if edges.is_relative() {
                if let Some(dir) = path.parent() {
                    config.graph.edges = Some(dir.join(edges));
                }
            }
        }
        Ok(config)
    }

    /// Parses and validates without touching the filesystem.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        match (&self.graph.preset, &self.graph.edges) {
            (Some(_), Some(_)) => {
                return Err(config_err("graph: give either preset or edges, not both"));
            }
            (None, None) => {
                return Err(config_err("graph: one of preset or edges is required"));
            }
            (None, Some(_)) if self.graph.n.is_none() => {
                return Err(config_err("graph.n is required with graph.edges"));
            }
            _ => {}
        }

        match self.game.kind {
            GameKind::Quadratic => {
                for (name, missing) in [
                    ("game.q", self.game.q.is_none()),
                    ("game.r", self.game.r.is_none()),
                    ("game.lower", self.game.lower.is_none()),
                    ("game.upper", self.game.upper.is_none()),
                ] {
                    if missing {
                        return Err(config_err(format!("{} is required for kind quadratic", name)));
                    }
                }
                if self.game.seed.is_some() {
                    return Err(config_err("game.seed does not apply to kind quadratic"));
                }
            }
            GameKind::CournotPreset | GameKind::RateControlPreset => {
                if self.game.q.is_some()
                    || self.game.r.is_some()
                    || self.game.lower.is_some()
                    || self.game.upper.is_some()
                {
                    return Err(config_err("game.q/r/lower/upper only apply to kind quadratic"));
                }
                if self.game.kind == GameKind::RateControlPreset && self.game.seed.is_some() {
                    return Err(config_err(
                        "game.seed does not apply to kind rate-control-preset",
                    ));
                }
            }
        }

        if !(self.solver.c > 0.0) {
            return Err(config_err("solver.c must be positive"));
        }
        match &self.solver.c0 {
            PenaltySpec::Fixed(v) if !(*v > 0.0) => {
                return Err(config_err("solver.c0 must be positive"));
            }
            PenaltySpec::Named(name) if name != "auto" => {
                return Err(config_err(format!(
                    "solver.c0 must be a number or \"auto\", got \"{}\"",
                    name
                )));
            }
            _ => {}
        }
        match &self.solver.beta {
            BetaSpec::Scalar(v) if !(*v > 0.0) => {
                return Err(config_err("solver.beta must be positive"));
            }
            BetaSpec::PerPlayer(v) if v.is_empty() || v.iter().any(|b| !(*b > 0.0)) => {
                return Err(config_err("solver.beta entries must be positive"));
            }
            _ => {}
        }

        for (name, (lo, hi)) in [
            ("init.own_range", self.init.own_range),
            ("init.others_range", self.init.others_range),
        ] {
            if !(lo < hi) {
                return Err(config_err(format!("{} must satisfy lo < hi", name)));
            }
        }

        if self.stopping.tol < 0.0 {
            return Err(config_err("stopping.tol must be nonnegative"));
        }
        if self.output.record_every == 0 {
            return Err(config_err("output.record_every must be at least 1"));
        }

        if let Some(baseline) = &self.baseline {
            if let Some(g) = baseline.gamma {
                if !(g > 0.0) {
                    return Err(config_err("baseline.gamma must be positive"));
                }
            }
            let constant = baseline.tau.is_some();
            let diminishing = baseline.a.is_some() || baseline.b.is_some();
            if constant && diminishing {
                return Err(config_err("baseline: tau excludes a/b"));
            }
            if baseline.a.is_some() != baseline.b.is_some() {
                return Err(config_err("baseline: a and b must be given together"));
            }
        }

        if let Some(oracle) = &self.oracle {
            if let Some(tau) = oracle.tau {
                if !(tau > 0.0) {
                    return Err(config_err("oracle.tau must be positive"));
                }
            }
            if !(oracle.tol > 0.0) {
                return Err(config_err("oracle.tol must be positive"));
            }
        }

        Ok(())
    }
}
