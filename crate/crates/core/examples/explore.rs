use std::time::Instant;

use coxnet::{
    fit_cox_classical, fit_cox_lasso_path, generate, rank_by_pvalue, train_path, LambdaInit, Model, PathConfig,
    SimScenario,
};

fn env(k: &str) -> Option<f64> {
    std::env::var(k).ok().and_then(|v| v.parse().ok())
}

fn tally(counts: &mut [usize; 10], ranking: &[usize]) {
    for &f in ranking.iter().take(3) {
        counts[f - 1] += 1;
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let model = match args.get(1).map(String::as_str) {
        Some("2") => Model::Model2,
        Some("2sq") => Model::Model2Squared,
        _ => Model::Model1,
    };
    let n: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let reps: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(3);
    let rho = env("RHO").unwrap_or(0.0);
    let verbose = env("VERBOSE").is_some();
    let mut net = [0usize; 10];
    let mut lasso_t = [0usize; 10];
    let mut cox_t = [0usize; 10];
    let mut total = 0.0;
    for seed in 0..reps {
        let s = SimScenario { model, n, p: 10, rho, c: 20.0, seed };
        let g = generate(&s).unwrap();
        let mut cfg = PathConfig { seed, ..Default::default() };
        if let Some(v) = env("DENSE") {
            cfg.dense_epochs = v as usize;
        }
        if let Some(v) = env("LR") {
            cfg.learning_rate = v;
        }
        if let Some(v) = env("EPS") {
            cfg.path_multiplier = v;
        }
        if let Some(v) = env("M") {
            cfg.hierarchy = v;
        }
        if let Some(v) = env("E") {
            cfg.epochs_per_lambda = v as usize;
        }
        if let Some(v) = env("DROP") {
            cfg.dropout_rate = v;
        }
        if let Some(v) = env("LAM") {
            cfg.lambda_init = LambdaInit::Value(v);
        }
        let t = Instant::now();
        if env("SELECT").is_some() {
            let sel = coxnet::path::select_hierarchy(&g.dataset, &cfg, &coxnet::path::HIERARCHY_GRID, seed).unwrap();
            print!("M={} ", sel.best);
            cfg.hierarchy = sel.best;
        }
        let r = train_path(&g.dataset, &cfg).unwrap();
        let el = t.elapsed();
        total += el.as_secs_f64();
        let lasso = fit_cox_lasso_path(&g.dataset, &cfg.schedule(), None).unwrap();
        let cox = rank_by_pvalue(&fit_cox_classical(&g.dataset).unwrap());
        tally(&mut net, &r.ranking);
        tally(&mut lasso_t, &lasso.ranking);
        tally(&mut cox_t, &cox);
        if verbose {
            println!(
                "seed {seed} censor {:.2} steps {} lam0 {:.3} time {:?}\n  net {:?}\n  lasso {:?}\n  cox {:?}",
                g.censor_rate,
                r.points.len(),
                r.lambda_init,
                el,
                r.ranking,
                lasso.ranking,
                cox
            );
        }
    }
    println!("net   top3 counts {net:?}  (mean path time {:.2}s)", total / reps as f64);
    println!("lasso top3 counts {lasso_t:?}");
    println!("cox   top3 counts {cox_t:?}");
}
