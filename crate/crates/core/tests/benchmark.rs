use coxnet::{run_benchmark, LambdaSchedule, Method, Model, PathConfig, SimScenario};

fn scenario(model: Model, n: usize) -> SimScenario {
    SimScenario { model, n, p: 10, rho: 0.0, c: 20.0, seed: 0 }
}

fn methods() -> Vec<Method> {
    vec![
        Method::Lassonet { config: PathConfig::default() },
        Method::Lasso { schedule: LambdaSchedule::default() },
        Method::Cox,
    ]
}

#[test]
fn single_replication_gives_indicators() {
    let table = run_benchmark(&[scenario(Model::Model1, 150)], &methods(), 1, 3, 3).unwrap();
    assert_eq!(table.cells.len(), 3);
    for cell in &table.cells {
        assert_eq!(cell.completed, 1);
        assert!(cell.prob_k_all == 0.0 || cell.prob_k_all == 1.0);
        assert!(cell.prob_k_i.values().all(|&v| v == 0.0 || v == 1.0));
        assert_eq!(cell.min_size_mean, cell.min_size_median);
        assert_eq!(cell.records[0].scenario.seed, 3);
    }
}

#[test]
fn tables_and_csv_are_reproducible() {
    let scenarios = [scenario(Model::Model1, 120), scenario(Model::Model2, 120)];
    let a = run_benchmark(&scenarios, &methods(), 3, 10, 3).unwrap();
    let b = run_benchmark(&scenarios, &methods(), 3, 10, 3).unwrap();
    assert_eq!(a, b);
    let csv = a.to_long_csv();
    assert_eq!(csv, b.to_long_csv());
    assert!(csv.starts_with("method,model,n,p,rho,c,metric,value\n"));
    // 6 cells, each with 6 summary rows and 10 per-feature rows
    assert_eq!(csv.lines().count(), 1 + 6 * 16);
    let seeds: Vec<u64> = a.cells[0].records.iter().map(|r| r.scenario.seed).collect();
    assert_eq!(seeds, vec![10, 11, 12]);
}

#[test]
fn invalid_benchmark_inputs() {
    assert!(run_benchmark(&[scenario(Model::Model1, 50)], &methods(), 0, 0, 3).is_err());
    assert!(run_benchmark(&[scenario(Model::Model1, 50)], &methods(), 1, 0, 11).is_err());
    let bad = SimScenario { rho: 1.0, ..scenario(Model::Model1, 50) };
    assert!(run_benchmark(&[bad], &methods(), 1, 0, 3).is_err());
}
