//! Command-line flags. Each flag overrides the matching key of the config
//! file, which in turn overrides the built-in defaults.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coxnet::{LambdaInit, Model, PathConfig};

use crate::config::{invalid, FitMethod, MethodName, RunConfig, ScenarioSpec};
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "coxnet", version, about = "Variable selection for right-censored survival data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a dataset from one of the simulation designs.
    Simulate(SimulateArgs),
    /// Fit the penalty path on a CSV dataset and write the ranking.
    Fit(FitArgs),
    /// Repeat simulation and selection over a scenario grid.
    Benchmark(BenchmarkArgs),
    /// Rank features, then refit a classical Cox model on the top k.
    Rank(RankArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    #[value(name = "model1")]
    Model1,
    #[value(name = "model2")]
    Model2,
    #[value(name = "model2_squared")]
    Model2Squared,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Model1 => Model::Model1,
            ModelArg::Model2 => Model::Model2,
            ModelArg::Model2Squared => Model::Model2Squared,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
}

/// Overrides for the network and schedule settings.
#[derive(Debug, Clone, Default, Args)]
pub struct PathArgs {
    #[arg(long)]
    pub epochs_per_lambda: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub path_multiplier: Option<f64>,
    /// Hierarchy coefficient M; `inf` removes the constraint.
    #[arg(long)]
    pub hierarchy: Option<f64>,
    /// `auto` or a positive number.
    #[arg(long)]
    pub lambda_init: Option<String>,
    #[arg(long)]
    pub dense_epochs: Option<usize>,
    /// Comma-separated hidden widths, e.g. `30,30,30`.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    #[arg(long)]
    pub dropout: Option<f64>,
}

impl PathArgs {
    fn apply(&self, section: &str, cfg: &mut PathConfig) -> Result<()> {
        if let Some(v) = self.epochs_per_lambda {
            cfg.epochs_per_lambda = v;
        }
        if let Some(v) = self.learning_rate {
            cfg.learning_rate = v;
        }
        if let Some(v) = self.path_multiplier {
            cfg.path_multiplier = v;
        }
        if let Some(v) = self.hierarchy {
            cfg.hierarchy = v;
        }
        if let Some(v) = &self.lambda_init {
            cfg.lambda_init = match v.trim() {
                "auto" => LambdaInit::Auto,
                s => LambdaInit::Value(s.parse().map_err(|_| {
                    invalid(format!("{section}.path.lambda_init = {s:?} must be \"auto\" or a number"))
                })?),
            };
        }
        if let Some(v) = self.dense_epochs {
            cfg.dense_epochs = v;
        }
        if let Some(v) = &self.hidden {
            cfg.hidden = v.clone();
        }
        if let Some(v) = self.dropout {
            cfg.dropout_rate = v;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: Common,
    /// Input CSV with `time`, `status` and feature columns.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub method: Option<FitMethod>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub select_hierarchy: bool,
    #[command(flatten)]
    pub path: PathArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub methods: Option<Vec<MethodName>>,
    /// Scenario grid: when any grid flag is given, the scenarios are the
    /// product of the given lists (unset ones use model1, n=200, p=10, rho=0, c=20).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub models: Option<Vec<ModelArg>>,
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub rho: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub c: Option<Vec<f64>>,
    #[command(flatten)]
    pub path: PathArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub select_hierarchy: bool,
    #[command(flatten)]
    pub path: PathArgs,
}

impl SimulateArgs {
    pub fn resolve(&self) -> Result<crate::config::SimulateConfig> {
        let mut cfg = RunConfig::load(self.common.config.as_deref())?.simulate;
        if let Some(v) = self.common.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.common.output {
            cfg.output = v.clone();
        }
        if let Some(v) = self.model {
            cfg.model = v.into();
        }
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = self.p {
            cfg.p = v;
        }
        if let Some(v) = self.rho {
            cfg.rho = v;
        }
        if let Some(v) = self.c {
            cfg.c = v;
        }
        Ok(cfg)
    }
}

impl FitArgs {
    pub fn resolve(&self) -> Result<crate::config::FitConfig> {
        let mut cfg = RunConfig::load(self.common.config.as_deref())?.fit;
        if let Some(v) = self.common.seed {
            cfg.path.seed = v;
        }
        if let Some(v) = &self.common.output {
            cfg.output = v.clone();
        }
        if let Some(v) = &self.data {
            cfg.data = Some(v.clone());
        }
        if let Some(v) = self.method {
            cfg.method = v;
        }
        if let Some(v) = self.k {
            cfg.k = v;
        }
        cfg.select_hierarchy |= self.select_hierarchy;
        self.path.apply("fit", &mut cfg.path)?;
        Ok(cfg)
    }
}

impl BenchmarkArgs {
    pub fn resolve(&self) -> Result<crate::config::BenchmarkConfig> {
        let mut cfg = RunConfig::load(self.common.config.as_deref())?.benchmark;
        if let Some(v) = self.common.seed {
            cfg.base_seed = v;
        }
        if let Some(v) = &self.common.output {
            cfg.output = v.clone();
        }
        if let Some(v) = self.replications {
            cfg.replications = v;
        }
        if let Some(v) = self.k {
            cfg.k = v;
        }
        if let Some(v) = &self.methods {
            cfg.methods = v.clone();
        }
        let grid_given =
            self.models.is_some() || self.n.is_some() || self.p.is_some() || self.rho.is_some() || self.c.is_some();
        if grid_given {
            let models: Vec<Model> = match &self.models {
                Some(m) => m.iter().map(|&m| m.into()).collect(),
                None => vec![Model::Model1],
            };
            let ns = self.n.clone().unwrap_or_else(|| vec![200]);
            let ps = self.p.clone().unwrap_or_else(|| vec![10]);
            let rhos = self.rho.clone().unwrap_or_else(|| vec![0.0]);
            let cs = self.c.clone().unwrap_or_else(|| vec![20.0]);
            cfg.scenarios.clear();
            for &model in &models {
                for &n in &ns {
                    for &p in &ps {
                        for &rho in &rhos {
                            for &c in &cs {
                                cfg.scenarios.push(ScenarioSpec { model, n, p, rho, c });
                            }
                        }
                    }
                }
            }
        }
        self.path.apply("benchmark", &mut cfg.path)?;
        Ok(cfg)
    }
}

impl RankArgs {
    pub fn resolve(&self) -> Result<crate::config::RankConfig> {
        let mut cfg = RunConfig::load(self.common.config.as_deref())?.rank;
        if let Some(v) = self.common.seed {
            cfg.path.seed = v;
        }
        if let Some(v) = &self.common.output {
            cfg.output = v.clone();
        }
        if let Some(v) = &self.data {
            cfg.data = Some(v.clone());
        }
        if let Some(v) = self.k {
            cfg.k = v;
        }
        cfg.select_hierarchy |= self.select_hierarchy;
        self.path.apply("rank", &mut cfg.path)?;
        Ok(cfg)
    }
}

/// Resolve the configuration and run the selected command.
pub fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Simulate(a) => crate::commands::simulate(&a.resolve()?),
        Command::Fit(a) => crate::commands::fit(&a.resolve()?),
        Command::Benchmark(a) => crate::commands::benchmark(&a.resolve()?),
        Command::Rank(a) => crate::commands::rank(&a.resolve()?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("coxnet").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_defaults() {
        let Command::Simulate(a) =
            parse(&["simulate", "--model", "model2_squared", "--n", "50", "--seed", "9"]).command
        else {
            panic!("wrong subcommand")
        };
        let cfg = a.resolve().unwrap();
        assert_eq!(cfg.model, Model::Model2Squared);
        assert_eq!((cfg.n, cfg.seed, cfg.p), (50, 9, 10));
    }

    #[test]
    fn benchmark_grid_is_a_product() {
        let Command::Benchmark(a) =
            parse(&["benchmark", "--models", "model1,model2", "--n", "100,200", "--rho", "0,0.5"]).command
        else {
            panic!("wrong subcommand")
        };
        let cfg = a.resolve().unwrap();
        assert_eq!(cfg.scenarios.len(), 8);
        assert!(cfg.scenarios.iter().all(|s| s.p == 10 && s.c == 20.0));
    }

    #[test]
    fn path_overrides() {
        let Command::Fit(a) =
            parse(&["fit", "--data", "d.csv", "--hierarchy", "inf", "--lambda-init", "3", "--hidden", "8,4"]).command
        else {
            panic!("wrong subcommand")
        };
        let cfg = a.resolve().unwrap();
        assert!(cfg.path.hierarchy.is_infinite());
        assert_eq!(cfg.path.lambda_init, LambdaInit::Value(3.0));
        assert_eq!(cfg.path.hidden, vec![8, 4]);
        assert_eq!(cfg.data, Some(PathBuf::from("d.csv")));
    }

    #[test]
    fn bad_lambda_init_names_the_field() {
        let Command::Rank(a) = parse(&["rank", "--lambda-init", "big"]).command else { panic!("wrong subcommand") };
        let err = a.resolve().unwrap_err();
        assert!(err.to_string().contains("rank.path.lambda_init"));
        assert_eq!(err.exit_code(), 2);
    }
}
