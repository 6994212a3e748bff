//! The four commands. Each takes its fully resolved config section, writes
//! its output files and returns a short human-readable summary.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use coxnet::path::{select_hierarchy, HierarchySelection, HIERARCHY_GRID};
use coxnet::{
    fit_cox_classical, fit_cox_lasso_path, generate, run_benchmark, standardize, train_path, BenchmarkTable,
    LassoCoxPath, Method, PathConfig, PathResult, SimScenario, Standardization,
};
use serde::Serialize;

use crate::config::{
    check_k, check_path, invalid, BenchmarkConfig, FitConfig, FitMethod, MethodName, RankConfig, SimulateConfig,
    FORMAT_VERSION,
};
use crate::data::{default_names, format_dataset, read_dataset, sha256_hex, write_file, LoadedData};
use crate::error::{CliError, Result};

/// Embedded in every JSON output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub format_version: &'static str,
    pub command: &'static str,
    /// SHA-256 of the resolved config section as JSON.
    pub config_hash: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_sha256: Option<String>,
}

impl Provenance {
    fn new<C: Serialize>(command: &'static str, config: &C, seed: u64, data_sha256: Option<String>) -> Self {
        let canonical = serde_json::to_string(config).expect("configs serialize");
        Self {
            tool: "coxnet",
            version: env!("CARGO_PKG_VERSION"),
            format_version: FORMAT_VERSION,
            command,
            config_hash: sha256_hex(canonical.as_bytes()),
            seed,
            data_sha256,
        }
    }
}

/// Path of the JSON file written next to a CSV output.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("outputs serialize");
    s.push('\n');
    s
}

fn require_data(field: &str, data: &Option<PathBuf>) -> Result<PathBuf> {
    data.clone().ok_or_else(|| invalid(format!("{field} is required (set it in the config or pass --data)")))
}

#[derive(Serialize)]
struct ScenarioDocument<'a> {
    provenance: Provenance,
    scenario: &'a SimScenario,
    data_file: String,
    n: usize,
    p: usize,
    events: usize,
    censor_rate: f64,
    true_features: &'a BTreeSet<usize>,
    config: &'a SimulateConfig,
}

pub fn simulate(cfg: &SimulateConfig) -> Result<String> {
    cfg.validate()?;
    let scenario = cfg.scenario();
    let generated = generate(&scenario)?;
    let ds = &generated.dataset;
    let csv = format_dataset(ds, &default_names(ds.p()));
    write_file(&cfg.output, &csv)?;
    let doc = ScenarioDocument {
        provenance: Provenance::new("simulate", cfg, cfg.seed, Some(sha256_hex(csv.as_bytes()))),
        scenario: &scenario,
        data_file: cfg.output.display().to_string(),
        n: ds.n(),
        p: ds.p(),
        events: ds.event_count(),
        censor_rate: generated.censor_rate,
        true_features: &generated.true_features,
        config: cfg,
    };
    let sidecar = sidecar_path(&cfg.output);
    write_file(&sidecar, &to_json(&doc))?;
    Ok(format!(
        "wrote {} ({} rows, {} features, censor rate {:.3}) and {}",
        cfg.output.display(),
        ds.n(),
        ds.p(),
        generated.censor_rate,
        sidecar.display()
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct RankedFeature {
    pub rank: usize,
    /// 1-based column among the feature columns.
    pub feature: usize,
    pub name: String,
}

fn ranked(ranking: &[usize], names: &[String]) -> Vec<RankedFeature> {
    ranking
        .iter()
        .enumerate()
        .map(|(r, &f)| RankedFeature { rank: r + 1, feature: f, name: names[f - 1].clone() })
        .collect()
}

#[derive(Serialize)]
#[serde(untagged)]
enum FitPath {
    Network(Box<PathResult>),
    Lasso(Box<LassoCoxPath>),
}

#[derive(Serialize)]
struct FitDocument<'a> {
    provenance: Provenance,
    method: FitMethod,
    n: usize,
    p: usize,
    feature_names: &'a [String],
    standardization: &'a Standardization,
    #[serde(skip_serializing_if = "Option::is_none")]
    hierarchy_selection: Option<HierarchySelection>,
    k: usize,
    top_k: Vec<RankedFeature>,
    ranking: Vec<RankedFeature>,
    path: FitPath,
    config: &'a FitConfig,
}

/// Choose `M` on a held-out split when requested; returns the config to fit with.
fn resolve_hierarchy(
    data: &coxnet::SurvivalDataset,
    path: &PathConfig,
    select: bool,
) -> Result<(PathConfig, Option<HierarchySelection>)> {
    if !select {
        return Ok((path.clone(), None));
    }
    let selection = select_hierarchy(data, path, &HIERARCHY_GRID, path.seed)?;
    Ok((PathConfig { hierarchy: selection.best, ..path.clone() }, Some(selection)))
}

fn load_standardized(path: &Path) -> Result<(LoadedData, coxnet::SurvivalDataset, Standardization)> {
    let loaded = read_dataset(path)?;
    let (z, st) = standardize(&loaded.dataset)?;
    Ok((loaded, z, st))
}

pub fn fit(cfg: &FitConfig) -> Result<String> {
    let data_path = require_data("fit.data", &cfg.data)?;
    check_path("fit", &cfg.path)?;
    let (loaded, z, st) = load_standardized(&data_path)?;
    check_k("fit.k", cfg.k, z.p())?;
    let (ranking, path, selection) = match cfg.method {
        FitMethod::Lassonet => {
            let (path_cfg, selection) = resolve_hierarchy(&z, &cfg.path, cfg.select_hierarchy)?;
            let result = train_path(&z, &path_cfg)?;
            (result.ranking.clone(), FitPath::Network(Box::new(result)), selection)
        }
        FitMethod::Lasso => {
            if cfg.select_hierarchy {
                return Err(invalid("fit.select_hierarchy applies only to method = lassonet"));
            }
            let result = fit_cox_lasso_path(&z, &cfg.path.schedule(), None)?;
            (result.ranking.clone(), FitPath::Lasso(Box::new(result)), None)
        }
    };
    let names = &loaded.feature_names;
    let top: Vec<RankedFeature> = ranked(&ranking[..cfg.k], names);
    let summary = format!("top {}: {}", cfg.k, top.iter().map(|f| f.name.as_str()).collect::<Vec<_>>().join(", "));
    let doc = FitDocument {
        provenance: Provenance::new("fit", cfg, cfg.path.seed, Some(loaded.sha256.clone())),
        method: cfg.method,
        n: z.n(),
        p: z.p(),
        feature_names: names,
        standardization: &st,
        hierarchy_selection: selection,
        k: cfg.k,
        top_k: top,
        ranking: ranked(&ranking, names),
        path,
        config: cfg,
    };
    write_file(&cfg.output, &to_json(&doc))?;
    Ok(format!("{summary}\nwrote {}", cfg.output.display()))
}

#[derive(Serialize)]
struct BenchmarkDocument<'a> {
    provenance: Provenance,
    table: &'a BenchmarkTable,
    config: &'a BenchmarkConfig,
}

pub fn benchmark_methods(cfg: &BenchmarkConfig) -> Vec<Method> {
    cfg.methods
        .iter()
        .map(|m| match m {
            MethodName::Lassonet => Method::Lassonet { config: cfg.path.clone() },
            MethodName::Lasso => Method::Lasso { schedule: cfg.path.schedule() },
            MethodName::Cox => Method::Cox,
        })
        .collect()
}

pub fn benchmark(cfg: &BenchmarkConfig) -> Result<String> {
    cfg.validate()?;
    check_path("benchmark", &cfg.path)?;
    let scenarios: Vec<SimScenario> = cfg.scenarios.iter().map(|s| s.to_scenario(cfg.base_seed)).collect();
    let table = run_benchmark(&scenarios, &benchmark_methods(cfg), cfg.replications, cfg.base_seed, cfg.k)?;
    let csv = table.to_long_csv();
    write_file(&cfg.output, &csv)?;
    let doc = BenchmarkDocument {
        provenance: Provenance::new("benchmark", cfg, cfg.base_seed, None),
        table: &table,
        config: cfg,
    };
    let sidecar = sidecar_path(&cfg.output);
    write_file(&sidecar, &to_json(&doc))?;
    let mut lines = Vec::new();
    for cell in &table.cells {
        let s = &cell.scenario;
        lines.push(format!(
            "{:<9} {} n={} p={} rho={} c={}: MinSize {:.2}, Prob({},all) {:.3}, completed {}/{}",
            cell.method,
            s.model.name(),
            s.n,
            s.p,
            s.rho,
            s.c,
            cell.min_size_mean,
            cell.k,
            cell.prob_k_all,
            cell.completed,
            cell.replications
        ));
    }
    lines.push(format!("wrote {} and {}", cfg.output.display(), sidecar.display()));
    Ok(lines.join("\n"))
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectedFeature {
    pub rank: usize,
    pub feature: usize,
    pub name: String,
    /// Coefficient on the standardized scale.
    pub beta: f64,
    pub std_err: f64,
    pub p_value: f64,
}

#[derive(Serialize)]
struct Refit {
    converged: bool,
    iterations: usize,
    neg_log_likelihood: f64,
}

#[derive(Serialize)]
struct RankDocument<'a> {
    provenance: Provenance,
    n: usize,
    p: usize,
    k: usize,
    selected: &'a [SelectedFeature],
    refit: Refit,
    #[serde(skip_serializing_if = "Option::is_none")]
    hierarchy_selection: Option<HierarchySelection>,
    lambda_init: f64,
    path_steps: usize,
    ranking: Vec<RankedFeature>,
    config: &'a RankConfig,
}

/// Network ranking, then a classical Cox fit on the top `k` columns only.
pub fn rank(cfg: &RankConfig) -> Result<String> {
    let data_path = require_data("rank.data", &cfg.data)?;
    check_path("rank", &cfg.path)?;
    let (loaded, z, _) = load_standardized(&data_path)?;
    check_k("rank.k", cfg.k, z.p())?;
    let (path_cfg, selection) = resolve_hierarchy(&z, &cfg.path, cfg.select_hierarchy)?;
    let result = train_path(&z, &path_cfg)?;
    let top: Vec<usize> = result.ranking[..cfg.k].to_vec();
    let columns: Vec<usize> = top.iter().map(|f| f - 1).collect();
    let sub = z.select_columns(&columns)?;
    let fit = fit_cox_classical(&sub)?;

    let names = &loaded.feature_names;
    let selected: Vec<SelectedFeature> = top
        .iter()
        .enumerate()
        .map(|(j, &f)| SelectedFeature {
            rank: j + 1,
            feature: f,
            name: names[f - 1].clone(),
            beta: fit.beta[j],
            std_err: fit.std_err[j],
            p_value: fit.p_values[j],
        })
        .collect();
    let doc = RankDocument {
        provenance: Provenance::new("rank", cfg, cfg.path.seed, Some(loaded.sha256.clone())),
        n: z.n(),
        p: z.p(),
        k: cfg.k,
        selected: &selected,
        refit: Refit {
            converged: fit.converged,
            iterations: fit.iterations,
            neg_log_likelihood: fit.neg_log_likelihood,
        },
        hierarchy_selection: selection,
        lambda_init: result.lambda_init,
        path_steps: result.points.len(),
        ranking: ranked(&result.ranking, names),
        config: cfg,
    };
    write_file(&cfg.output, &to_json(&doc))?;

    let width = selected.iter().map(|s| s.name.len()).max().unwrap_or(4).max(7);
    let mut lines = vec![format!("{:<4} {:<width$} {:>12} {:>12}", "rank", "feature", "beta", "p-value")];
    for s in &selected {
        lines.push(format!("{:<4} {:<width$} {:>12.4} {:>12.4e}", s.rank, s.name, s.beta, s.p_value));
    }
    lines.push(format!("wrote {}", cfg.output.display()));
    if !fit.converged {
        return Err(CliError::Numerical(format!(
            "post-hoc Cox fit on the selected features did not converge after {} iterations; partial fit written to {}",
            fit.iterations,
            cfg.output.display()
        )));
    }
    Ok(lines.join("\n"))
}
