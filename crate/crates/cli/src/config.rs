//! TOML run configuration. Every table rejects unknown keys; missing keys
//! take the defaults below.

use std::path::{Path, PathBuf};

use coxnet::{Model, PathConfig, SimScenario};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub format_version: Option<String>,
    pub simulate: SimulateConfig,
    pub fit: FitConfig,
    pub benchmark: BenchmarkConfig,
    pub rank: RankConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub model: Model,
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    pub c: f64,
    pub seed: u64,
    /// Data CSV; the scenario JSON is written next to it with a `.json` extension.
    pub output: PathBuf,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self { model: Model::Model1, n: 100, p: 10, rho: 0.0, c: 20.0, seed: 0, output: PathBuf::from("simulated.csv") }
    }
}

impl SimulateConfig {
    pub fn scenario(&self) -> SimScenario {
        SimScenario { model: self.model, n: self.n, p: self.p, rho: self.rho, c: self.c, seed: self.seed }
    }

    pub fn validate(&self) -> Result<()> {
        check_grid_point("simulate", self.n, self.p, self.rho, self.c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    Lassonet,
    Lasso,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    pub data: Option<PathBuf>,
    pub output: PathBuf,
    pub method: FitMethod,
    pub k: usize,
    /// Choose the hierarchy coefficient on a held-out split before fitting.
    pub select_hierarchy: bool,
    pub path: PathConfig,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            data: None,
            output: PathBuf::from("fit.json"),
            method: FitMethod::Lassonet,
            k: 3,
            select_hierarchy: false,
            path: PathConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Lassonet,
    Lasso,
    Cox,
}

/// A simulation scenario without its seed; seeds come from `base_seed + r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub model: Model,
    pub n: usize,
    #[serde(default = "default_p")]
    pub p: usize,
    #[serde(default)]
    pub rho: f64,
    #[serde(default = "default_c")]
    pub c: f64,
}

fn default_p() -> usize {
    10
}

fn default_c() -> f64 {
    20.0
}

impl ScenarioSpec {
    pub fn to_scenario(&self, seed: u64) -> SimScenario {
        SimScenario { model: self.model, n: self.n, p: self.p, rho: self.rho, c: self.c, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchmarkConfig {
    /// Long-format table; the JSON result goes next to it with a `.json` extension.
    pub output: PathBuf,
    pub replications: usize,
    pub base_seed: u64,
    pub k: usize,
    pub methods: Vec<MethodName>,
    pub scenarios: Vec<ScenarioSpec>,
    /// Network settings; the lasso uses the same schedule.
    pub path: PathConfig,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            output: PathBuf::from("benchmark.csv"),
            replications: 30,
            base_seed: 0,
            k: 3,
            methods: vec![MethodName::Lassonet, MethodName::Lasso, MethodName::Cox],
            scenarios: vec![ScenarioSpec { model: Model::Model1, n: 200, p: 10, rho: 0.0, c: 20.0 }],
            path: PathConfig::default(),
        }
    }
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(invalid("benchmark.replications = 0 must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(invalid("benchmark.methods is empty"));
        }
        if self.scenarios.is_empty() {
            return Err(invalid("benchmark.scenarios is empty"));
        }
        for s in &self.scenarios {
            check_grid_point("benchmark.scenarios", s.n, s.p, s.rho, s.c)?;
            check_k("benchmark.k", self.k, s.p)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RankConfig {
    pub data: Option<PathBuf>,
    pub output: PathBuf,
    pub k: usize,
    pub select_hierarchy: bool,
    pub path: PathConfig,
}

impl Default for RankConfig {
    fn default() -> Self {
        Self {
            data: None,
            output: PathBuf::from("rank.json"),
            k: 5,
            select_hierarchy: false,
            path: PathConfig::default(),
        }
    }
}

pub(crate) fn invalid(message: impl Into<String>) -> CliError {
    CliError::InvalidConfig(message.into())
}

fn check_grid_point(section: &str, n: usize, p: usize, rho: f64, c: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rho) {
        return Err(invalid(format!("{section}.rho = {rho} must lie in [0, 1)")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid(format!("{section}.c = {c} must be positive and finite")));
    }
    if p < coxnet::simgen::SIGNAL_DIM {
        return Err(invalid(format!("{section}.p = {p} must be at least {}", coxnet::simgen::SIGNAL_DIM)));
    }
    if n < 2 {
        return Err(invalid(format!("{section}.n = {n} must be at least 2")));
    }
    Ok(())
}

pub(crate) fn check_k(field: &str, k: usize, p: usize) -> Result<()> {
    if k == 0 || k > p {
        return Err(invalid(format!("{field} = {k} must lie in 1..={p}")));
    }
    Ok(())
}

pub(crate) fn check_path(section: &str, path: &PathConfig) -> Result<()> {
    path.validate().map_err(|e| {
        invalid(format!("{section}.path: {}", e.to_string().trim_start_matches("invalid configuration: ")))
    })
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        match cfg.format_version.as_deref() {
            None | Some(FORMAT_VERSION) => Ok(cfg),
            Some(v) => Err(invalid(format!("format_version = {v:?} is not supported (expected {FORMAT_VERSION:?})"))),
        }
    }

    /// Read a config file, or the defaults when `path` is `None`.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| invalid(format!("cannot read config {}: {e}", p.display())))?;
                Self::parse(&text)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse("[simulate]\nseeed = 3\n").is_err());
        assert!(RunConfig::parse("[fit.path]\nlr = 0.1\n").is_err());
        assert!(RunConfig::parse("colour = 1\n").is_err());
    }

    #[test]
    fn version_is_checked() {
        assert!(RunConfig::parse("format_version = \"1\"").is_ok());
        assert!(matches!(RunConfig::parse("format_version = \"9\""), Err(CliError::InvalidConfig(_))));
    }

    #[test]
    fn nested_values_parse() {
        let cfg = RunConfig::parse(
            r#"
            [benchmark]
            replications = 4
            methods = ["lasso", "cox"]
            scenarios = [{ model = "model2", n = 300, rho = 0.5 }]
            [benchmark.path]
            hierarchy = "inf"
            lambda_init = 2.5
            "#,
        )
        .unwrap();
        assert_eq!(cfg.benchmark.replications, 4);
        assert_eq!(cfg.benchmark.scenarios[0].p, 10);
        assert_eq!(cfg.benchmark.scenarios[0].c, 20.0);
        assert!(cfg.benchmark.path.hierarchy.is_infinite());
        assert_eq!(cfg.benchmark.path.lambda_init, coxnet::LambdaInit::Value(2.5));
    }

    #[test]
    fn rho_error_names_the_field() {
        let cfg = SimulateConfig { rho: 1.5, ..Default::default() };
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("simulate.rho"), "{msg}");
    }
}
