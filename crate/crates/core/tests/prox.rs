mod common;

use common::rng;
use coxnet::hier_prox::{hier_prox_oracle, prox_objective, soft_threshold};
use coxnet::{hier_prox_batch, hier_prox_single, ProxInput};
use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn random_input(r: &mut ChaCha8Rng) -> ProxInput {
    let d = r.gen_range(1..=8);
    ProxInput {
        b: r.gen_range(-2.0..2.0),
        w: Array1::from_shape_simple_fn(d, || r.gen_range(-1.5..1.5)),
        lambda_step: r.gen_range(0.0..1.0),
        m: r.gen_range(0.05..3.0),
    }
}

fn feasible(input: &ProxInput, theta: f64, w: &Array1<f64>) -> bool {
    w.iter().all(|v| v.abs() <= input.m * theta.abs())
}

#[test]
fn closed_form_beats_grid_oracle() {
    let mut r = rng(11);
    for _ in 0..100 {
        let input = random_input(&mut r);
        let exact = hier_prox_single(&input);
        let grid = hier_prox_oracle(&input, 1e-4);
        let e = prox_objective(&input, exact.theta, exact.w.view());
        let g = prox_objective(&input, grid.theta, grid.w.view());
        assert!(e <= g + 1e-6, "{input:?}: {e} > {g}");
        assert!(feasible(&input, exact.theta, &exact.w), "{input:?} -> {exact:?}");
    }
}

#[test]
fn batch_applies_columnwise() {
    let mut r = rng(12);
    let (d, p) = (6, 5);
    let theta = Array1::from_shape_simple_fn(p, || r.gen_range(-1.0..1.0));
    let w0 = Array2::from_shape_simple_fn((d, p), || r.gen_range(-1.0..1.0));
    let (t, w) = hier_prox_batch(&theta, &w0, 0.2, 0.7).unwrap();
    for i in 0..p {
        let single = hier_prox_single(&ProxInput { b: theta[i], w: w0.column(i).to_owned(), lambda_step: 0.2, m: 0.7 });
        assert_eq!(single.theta, t[i]);
        assert_eq!(single.w, w.column(i));
    }
    assert!(hier_prox_batch(&theta, &Array2::zeros((d, p + 1)), 0.2, 0.7).is_err());
}

#[test]
fn zero_hierarchy_is_soft_threshold_with_empty_column() {
    let mut r = rng(13);
    for _ in 0..50 {
        let mut input = random_input(&mut r);
        input.m = 0.0;
        let out = hier_prox_single(&input);
        assert_eq!(out.theta, soft_threshold(input.b, input.lambda_step));
        assert!(out.w.iter().all(|&v| v == 0.0));
    }
}

#[test]
fn unbounded_hierarchy_leaves_column() {
    let mut r = rng(14);
    for _ in 0..50 {
        let mut input = random_input(&mut r);
        input.m = f64::INFINITY;
        let out = hier_prox_single(&input);
        assert_eq!(out.theta, soft_threshold(input.b, input.lambda_step));
        assert_eq!(out.w, input.w);
    }
}

#[test]
fn frozen_reference_case() {
    let input = ProxInput { b: 0.2, w: Array1::from(vec![1.0, -0.8]), lambda_step: 0.1, m: 0.5 };
    let out = hier_prox_single(&input);
    let grid = hier_prox_oracle(&input, 1e-4);
    assert!((out.theta - 2.0 / 3.0).abs() < 1e-12);
    assert!((out.w[0] - 1.0 / 3.0).abs() < 1e-12 && (out.w[1] + 1.0 / 3.0).abs() < 1e-12);
    assert!((grid.theta - out.theta).abs() < 1e-4);
}
