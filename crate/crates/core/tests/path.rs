use std::collections::BTreeSet;

use coxnet::path::train_path_inspect;
use coxnet::resnet::{forward_batch, init_params};
use coxnet::survival::neg_log_partial_likelihood;
use coxnet::{
    fit_cox_lasso_path, generate, select_top_k, train_dense, train_path, LambdaInit, Mode, Model, NetworkParams,
    PathConfig, SimScenario, SurvivalDataset,
};

fn model1(n: usize, seed: u64) -> SurvivalDataset {
    generate(&SimScenario { model: Model::Model1, n, p: 10, rho: 0.0, c: 20.0, seed }).unwrap().dataset
}

fn eval_loss(params: &NetworkParams, data: &SurvivalDataset) -> f64 {
    let s = forward_batch(params, data.covariates().view(), Mode::Eval, 0).unwrap();
    neg_log_partial_likelihood(s.view(), data).unwrap()
}

#[test]
fn zero_dense_epochs_returns_initialisation() {
    let data = model1(100, 1);
    let cfg = PathConfig { dense_epochs: 0, seed: 5, ..Default::default() };
    let params = train_dense(&data, &cfg).unwrap();
    assert_eq!(params, init_params(&cfg.architecture(10).unwrap(), 5));
}

// recorded from the seeded run: eval-mode loss at initialisation and after 100 epochs
const BEFORE: f64 = 791.828819521918;
const AFTER: f64 = 669.500382807209;

#[test]
fn dense_training_lowers_the_loss() {
    let data = model1(200, 2);
    let cfg = PathConfig { seed: 3, ..Default::default() };
    let before = eval_loss(&init_params(&cfg.architecture(10).unwrap(), 3), &data);
    let after = eval_loss(&train_dense(&data, &cfg).unwrap(), &data);
    println!("dense loss {before:.12} -> {after:.12}");
    assert!(after < before);
    assert!((before - BEFORE).abs() < 1e-9 * BEFORE && (after - AFTER).abs() < 1e-9 * AFTER);
    assert_eq!(train_dense(&data, &cfg).unwrap(), train_dense(&data, &cfg).unwrap());
}

#[test]
fn path_contract() {
    let data = model1(200, 4);
    let cfg = PathConfig { seed: 4, ..Default::default() };
    let m = cfg.hierarchy;
    let mut epochs = 0usize;
    let mut violations = 0usize;
    let result = train_path_inspect(&data, None, &cfg, |params| {
        epochs += 1;
        let w0 = params.first_layer();
        for (i, col) in w0.columns().into_iter().enumerate() {
            if col.iter().any(|v| v.abs() > m * params.theta[i].abs()) {
                violations += 1;
            }
        }
    })
    .unwrap();
    assert_eq!(violations, 0);
    assert_eq!(epochs, 1 + result.points.len() * cfg.epochs_per_lambda);

    let pts = &result.points;
    assert_eq!(pts.last().unwrap().active_count, 0);
    assert!(pts.windows(2).all(|w| w[1].lambda > w[0].lambda));
    for pt in pts {
        assert_eq!(pt.active_count, pt.theta_snapshot.iter().filter(|&&t| t != 0.0).count());
    }
    assert!(result.initial_theta.iter().all(|&t| t != 0.0), "path should start dense");
    let mut sorted = result.ranking.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, (1..=10).collect::<Vec<_>>());
    // ranking follows drop lambda
    for w in result.ranking.windows(2) {
        assert!(result.drop_lambda[w[0] - 1] >= result.drop_lambda[w[1] - 1]);
    }
}

#[test]
fn path_is_reproducible() {
    let data = model1(150, 6);
    let cfg = PathConfig { seed: 6, ..Default::default() };
    let a = train_path(&data, &cfg).unwrap();
    let b = train_path(&data, &cfg).unwrap();
    assert_eq!(a, b);
    let json_a = serde_json::to_string(&a).unwrap();
    assert_eq!(json_a, serde_json::to_string(&b).unwrap());
    let c = train_path(&data, &PathConfig { seed: 7, ..cfg }).unwrap();
    assert_ne!(a.points, c.points);
}

#[test]
fn zero_hierarchy_tracks_the_linear_lasso() {
    let data = model1(200, 8);
    // dropout would turn the constant output of an empty first layer into per-row noise
    // the auto start zeroes everything in one step once W_0 is cleared; start low for a long path
    let cfg = PathConfig {
        hierarchy: 0.0,
        dropout_rate: 0.0,
        lambda_init: LambdaInit::Value(1.0),
        seed: 8,
        ..Default::default()
    };
    let net = train_path(&data, &cfg).unwrap();
    let lasso = fit_cox_lasso_path(&data, &cfg.schedule(), Some(&net.initial_theta)).unwrap();
    assert!(net.points.len() > 100, "{} path points", net.points.len());
    assert_eq!(net.points.len(), lasso.beta_snapshots.len());
    let mut worst = 0.0f64;
    for (pt, beta) in net.points.iter().zip(&lasso.beta_snapshots) {
        for (a, b) in pt.theta_snapshot.iter().zip(beta) {
            worst = worst.max((a - b).abs());
        }
    }
    assert!(worst < 1e-8, "max deviation {worst}");
    assert_eq!(net.ranking, lasso.ranking);
}

#[test]
fn model1_true_features_drop_last() {
    let truth = BTreeSet::from([1, 4, 9]);
    let hits = (0..10)
        .filter(|&seed| {
            let data = model1(1000, seed);
            let r = train_path(&data, &PathConfig { seed, ..Default::default() }).unwrap();
            select_top_k(&r.ranking, 3).unwrap() == truth
        })
        .count();
    println!("true features last to drop in {hits}/10 seeds");
    assert_eq!(hits, 10);
}

#[test]
fn invalid_configs_are_rejected() {
    let data = model1(50, 9);
    for cfg in [
        PathConfig { learning_rate: 0.0, ..Default::default() },
        PathConfig { path_multiplier: -1.0, ..Default::default() },
        PathConfig { epochs_per_lambda: 0, ..Default::default() },
        PathConfig { hierarchy: f64::NAN, ..Default::default() },
        PathConfig { dropout_rate: 1.0, ..Default::default() },
        PathConfig { hidden: vec![], ..Default::default() },
    ] {
        assert!(matches!(train_path(&data, &cfg), Err(coxnet::Error::InvalidConfig(_))), "{cfg:?}");
    }
}
