//! Selection metrics over replicated rankings and the benchmark harness.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{fit_cox_classical, fit_cox_lasso_path, rank_by_pvalue};
use crate::error::{Error, Result};
use crate::path::{train_path, LambdaSchedule, PathConfig};
use crate::simgen::{generate, SimScenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub method: String,
    pub scenario: SimScenario,
    /// 1-based feature indices, most important first.
    pub ranking: Vec<usize>,
    pub truth: BTreeSet<usize>,
}

/// Length of the shortest ranking prefix containing every true feature.
pub fn min_size(ranking: &[usize], truth: &BTreeSet<usize>) -> Result<usize> {
    if truth.is_empty() {
        return Err(Error::EmptyTruth);
    }
    let mut remaining = truth.len();
    for (pos, f) in ranking.iter().enumerate() {
        if truth.contains(f) {
            remaining -= 1;
            if remaining == 0 {
                return Ok(pos + 1);
            }
        }
    }
    Err(Error::FeatureOutOfRange { feature: *truth.iter().next_back().expect("nonempty"), p: ranking.len() })
}

fn common_truth(records: &[ReplicationRecord]) -> Result<&BTreeSet<usize>> {
    let first = &records.first().ok_or(Error::EmptyTruth)?.truth;
    if records.iter().any(|r| &r.truth != first) {
        return Err(Error::InconsistentTruth);
    }
    if first.is_empty() {
        return Err(Error::EmptyTruth);
    }
    Ok(first)
}

/// Fraction of records whose top `k` contains every true feature.
pub fn prob_k_all(records: &[ReplicationRecord], k: usize) -> Result<f64> {
    let truth = common_truth(records)?;
    if k < truth.len() {
        return Err(Error::KTooSmall { k, truth: truth.len() });
    }
    let hits = records
        .iter()
        .filter(|r| {
            let top: BTreeSet<usize> = r.ranking.iter().take(k).copied().collect();
            truth.is_subset(&top)
        })
        .count();
    Ok(hits as f64 / records.len() as f64)
}

/// Fraction of records whose top `k` contains feature `i` (1-based).
pub fn prob_k_i(records: &[ReplicationRecord], k: usize, i: usize) -> Result<f64> {
    let first = records.first().ok_or(Error::EmptyTruth)?;
    let p = first.ranking.len();
    if i == 0 || i > p {
        return Err(Error::FeatureOutOfRange { feature: i, p });
    }
    let hits = records.iter().filter(|r| r.ranking.iter().take(k).any(|&f| f == i)).count();
    Ok(hits as f64 / records.len() as f64)
}

/// A selection method under comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    /// Residual network under the hierarchy constraint.
    Lassonet { config: PathConfig },
    /// l1-penalised linear Cox with the same schedule semantics.
    Lasso { schedule: LambdaSchedule },
    /// Unpenalised linear Cox ranked by Wald p-value.
    Cox,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Lassonet { .. } => "lassonet",
            Method::Lasso { .. } => "lasso",
            Method::Cox => "cox",
        }
    }

    /// Ranking for one dataset. `seed` replaces the network's init seed.
    pub fn rank(&self, data: &crate::survival::SurvivalDataset, seed: u64) -> Result<Vec<usize>> {
        match self {
            Method::Lassonet { config } => {
                let cfg = PathConfig { seed, ..config.clone() };
                Ok(train_path(data, &cfg)?.ranking)
            }
            Method::Lasso { schedule } => Ok(fit_cox_lasso_path(data, schedule, None)?.ranking),
            Method::Cox => {
                let fit = fit_cox_classical(data)?;
                if !fit.converged {
                    return Err(Error::NonFiniteLoss(format!(
                        "Newton iterations did not converge after {}",
                        fit.iterations
                    )));
                }
                Ok(rank_by_pvalue(&fit))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedReplication {
    pub replication: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkCell {
    pub method: String,
    /// Scenario with the per-replication seed cleared to the base seed.
    pub scenario: SimScenario,
    pub k: usize,
    pub replications: usize,
    pub completed: usize,
    pub failures: Vec<FailedReplication>,
    pub min_size_mean: f64,
    pub min_size_median: f64,
    pub prob_k_all: f64,
    /// Feature (1-based) to `Prob(k, i)`, for every feature.
    pub prob_k_i: BTreeMap<usize, f64>,
    pub records: Vec<ReplicationRecord>,
}

impl BenchmarkCell {
    pub fn completion_rate(&self) -> f64 {
        self.completed as f64 / self.replications as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkTable {
    pub base_seed: u64,
    pub replications: usize,
    pub k: usize,
    pub cells: Vec<BenchmarkCell>,
}

impl BenchmarkTable {
    pub fn cell(&self, method: &str, scenario_matches: impl Fn(&SimScenario) -> bool) -> Option<&BenchmarkCell> {
        self.cells.iter().find(|c| c.method == method && scenario_matches(&c.scenario))
    }

    /// Long format: `method,model,n,p,rho,c,metric,value`.
    pub fn to_long_csv(&self) -> String {
        let mut out = String::from("method,model,n,p,rho,c,metric,value\n");
        for cell in &self.cells {
            let s = &cell.scenario;
            let prefix = format!("{},{},{},{},{},{}", cell.method, s.model.name(), s.n, s.p, s.rho, s.c);
            let mut row = |metric: &str, value: String| {
                out.push_str(&format!("{prefix},{metric},{value}\n"));
            };
            row("replications", cell.replications.to_string());
            row("completed", cell.completed.to_string());
            row("failed", cell.failures.len().to_string());
            row("min_size_mean", cell.min_size_mean.to_string());
            row("min_size_median", cell.min_size_median.to_string());
            row(&format!("prob_{}_all", cell.k), cell.prob_k_all.to_string());
            for (i, v) in &cell.prob_k_i {
                row(&format!("prob_{}_{}", cell.k, i), v.to_string());
            }
        }
        out
    }
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 0 {
        0.5 * (values[mid - 1] + values[mid])
    } else {
        values[mid]
    }
}

fn summarise(
    method: &Method,
    scenario: &SimScenario,
    k: usize,
    replications: usize,
    outcomes: Vec<(usize, u64, Result<ReplicationRecord>)>,
) -> Result<BenchmarkCell> {
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (replication, seed, outcome) in outcomes {
        match outcome {
            Ok(r) => records.push(r),
            Err(e) => failures.push(FailedReplication { replication, seed, error: e.to_string() }),
        }
    }
    let (min_size_mean, min_size_median, prob_all, prob_i) = if records.is_empty() {
        (f64::NAN, f64::NAN, f64::NAN, BTreeMap::new())
    } else {
        let mut sizes =
            records.iter().map(|r| min_size(&r.ranking, &r.truth).map(|m| m as f64)).collect::<Result<Vec<f64>>>()?;
        let mean = sizes.iter().sum::<f64>() / sizes.len() as f64;
        let med = median(&mut sizes);
        let all = prob_k_all(&records, k)?;
        let mut per = BTreeMap::new();
        for i in 1..=scenario.p {
            per.insert(i, prob_k_i(&records, k, i)?);
        }
        (mean, med, all, per)
    };
    Ok(BenchmarkCell {
        method: method.name().to_string(),
        scenario: scenario.clone(),
        k,
        replications,
        completed: records.len(),
        failures,
        min_size_mean,
        min_size_median,
        prob_k_all: prob_all,
        prob_k_i: prob_i,
        records,
    })
}

/// Run every method on `replications` datasets per scenario, with dataset
/// seeds `base_seed + r`. Replications run in parallel; the reduction is
/// ordered, so tables are reproducible.
pub fn run_benchmark(
    scenarios: &[SimScenario],
    methods: &[Method],
    replications: usize,
    base_seed: u64,
    k: usize,
) -> Result<BenchmarkTable> {
    if replications == 0 {
        return Err(Error::InvalidConfig("replications must be at least 1".into()));
    }
    for s in scenarios {
        s.validate()?;
        if k == 0 || k > s.p {
            return Err(Error::KOutOfRange { k, p: s.p });
        }
    }
    let jobs: Vec<(usize, usize)> = (0..scenarios.len()).flat_map(|s| (0..replications).map(move |r| (s, r))).collect();
    // one dataset per (scenario, replication), shared by all methods
    let results: Vec<Vec<(u64, Result<ReplicationRecord>)>> = jobs
        .par_iter()
        .map(|&(s, r)| {
            let seed = base_seed.wrapping_add(r as u64);
            let scenario = SimScenario { seed, ..scenarios[s].clone() };
            let generated = generate(&scenario);
            methods
                .iter()
                .map(|m| {
                    let record = generated.as_ref().map_err(Clone::clone).and_then(|g| {
                        Ok(ReplicationRecord {
                            method: m.name().to_string(),
                            scenario: scenario.clone(),
                            ranking: m.rank(&g.dataset, seed)?,
                            truth: g.true_features.clone(),
                        })
                    });
                    (seed, record)
                })
                .collect()
        })
        .collect();

    let mut cells = Vec::with_capacity(scenarios.len() * methods.len());
    for (s, scenario) in scenarios.iter().enumerate() {
        let base = SimScenario { seed: base_seed, ..scenario.clone() };
        for (m, method) in methods.iter().enumerate() {
            let outcomes = (0..replications)
                .map(|r| {
                    let (seed, rec) = results[s * replications + r][m].clone();
                    (r, seed, rec)
                })
                .collect();
            cells.push(summarise(method, &base, k, replications, outcomes)?);
        }
    }
    Ok(BenchmarkTable { base_seed, replications, k, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simgen::Model;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn truth() -> BTreeSet<usize> {
        BTreeSet::from([1, 4, 9])
    }

    fn record(ranking: Vec<usize>) -> ReplicationRecord {
        ReplicationRecord {
            method: "m".into(),
            scenario: SimScenario { model: Model::Model1, n: 10, p: 10, rho: 0.0, c: 1.0, seed: 0 },
            ranking,
            truth: truth(),
        }
    }

    #[test]
    fn min_size_examples() {
        assert_eq!(min_size(&[4, 1, 9, 2, 3, 5, 6, 7, 8, 10], &truth()).unwrap(), 3);
        assert_eq!(min_size(&[4, 2, 1, 9, 3, 5, 6, 7, 8, 10], &truth()).unwrap(), 4);
        let all: BTreeSet<usize> = (1..=5).collect();
        assert_eq!(min_size(&[5, 3, 1, 2, 4], &all).unwrap(), 5);
        assert_eq!(min_size(&[1, 2], &BTreeSet::new()).unwrap_err(), Error::EmptyTruth);
    }

    #[test]
    fn probability_examples() {
        let good = record(vec![9, 4, 1, 2, 3, 5, 6, 7, 8, 10]);
        let bad = record(vec![2, 3, 5, 6, 7, 8, 10, 9, 4, 1]);
        assert_eq!(prob_k_all(&[good.clone(), good.clone()], 3).unwrap(), 1.0);
        assert_eq!(prob_k_all(&[bad.clone()], 3).unwrap(), 0.0);
        let mixed = [good.clone(), good.clone(), bad.clone(), good.clone()];
        assert_eq!(prob_k_all(&mixed, 3).unwrap(), 0.75);
        assert_eq!(prob_k_i(&[good.clone()], 1, 9).unwrap(), 1.0);
        assert_eq!(prob_k_i(&[bad.clone()], 9, 1).unwrap(), 0.0);
        assert!(matches!(prob_k_all(&mixed, 2), Err(Error::KTooSmall { .. })));
        assert!(matches!(prob_k_i(&mixed, 3, 11), Err(Error::FeatureOutOfRange { .. })));
        let mut other = good.clone();
        other.truth = BTreeSet::from([1, 2]);
        assert_eq!(prob_k_all(&[good, other], 3).unwrap_err(), Error::InconsistentTruth);
    }

    fn arb_records() -> impl Strategy<Value = Vec<ReplicationRecord>> {
        proptest::collection::vec(any::<u64>(), 1..30).prop_map(|seeds| {
            seeds
                .into_iter()
                .map(|s| {
                    let mut r: Vec<usize> = (1..=10).collect();
                    r.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(s));
                    record(r)
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn prob_all_is_mean_of_min_size_indicator(records in arb_records(), k in 3usize..=10) {
            let direct = prob_k_all(&records, k).unwrap();
            let via_min = records
                .iter()
                .filter(|r| min_size(&r.ranking, &r.truth).unwrap() <= k)
                .count() as f64 / records.len() as f64;
            prop_assert_eq!(direct, via_min);
            for i in truth() {
                prop_assert!(direct <= prob_k_i(&records, k, i).unwrap());
            }
            let mut reversed = records.clone();
            reversed.reverse();
            prop_assert_eq!(direct, prob_k_all(&reversed, k).unwrap());
        }

        #[test]
        fn min_size_monotone_in_truth(seed in any::<u64>(), extra in 1usize..=10) {
            let mut r: Vec<usize> = (1..=10).collect();
            r.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let base = min_size(&r, &truth()).unwrap();
            let mut bigger = truth();
            bigger.insert(extra);
            prop_assert!(min_size(&r, &bigger).unwrap() >= base);
            prop_assert!(base >= 3 && base <= 10);
        }
    }

    #[test]
    fn single_replication_gives_indicators() {
        let scenario = SimScenario { model: Model::Model1, n: 300, p: 10, rho: 0.0, c: 20.0, seed: 0 };
        let methods = [Method::Cox];
        let table = run_benchmark(&[scenario.clone()], &methods, 1, 42, 3).unwrap();
        let cell = &table.cells[0];
        assert!(cell.prob_k_all == 0.0 || cell.prob_k_all == 1.0);
        assert!(cell.prob_k_i.values().all(|&v| v == 0.0 || v == 1.0));
        assert_eq!(cell.min_size_mean, cell.min_size_median);
        let again = run_benchmark(&[scenario], &methods, 1, 42, 3).unwrap();
        assert_eq!(table, again);
        assert!(run_benchmark(&[], &methods, 0, 42, 3).is_err());
    }
}
