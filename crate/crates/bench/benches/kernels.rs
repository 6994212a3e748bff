use std::hint::black_box;

use coxnet::hier_prox::hier_prox_in_place;
use coxnet::resnet::{backprop_cached, forward_cached, init_params};
use coxnet::survival::{loss_and_gradient, neg_log_partial_likelihood};
use coxnet::{generate, Mode, Model, PathConfig, SimScenario, SurvivalDataset};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ndarray::Array1;

fn dataset(n: usize, p: usize) -> SurvivalDataset {
    generate(&SimScenario { model: Model::Model1, n, p, rho: 0.5, c: 5.0, seed: 1 }).unwrap().dataset
}

fn partial_likelihood(c: &mut Criterion) {
    let mut group = c.benchmark_group("partial_likelihood");
    for n in [200, 1000, 5000] {
        let data = dataset(n, 10);
        let scores = data.covariates().column(0).to_owned();
        group.bench_with_input(BenchmarkId::new("loss", n), &n, |b, _| {
            b.iter(|| neg_log_partial_likelihood(black_box(scores.view()), &data).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("loss_and_gradient", n), &n, |b, _| {
            b.iter(|| loss_and_gradient(black_box(scores.view()), &data).unwrap())
        });
    }
    group.finish();
}

fn hier_prox(c: &mut Criterion) {
    let mut group = c.benchmark_group("hier_prox_batch");
    for p in [10, 500] {
        let arch = PathConfig::default().architecture(p).unwrap();
        let params = init_params(&arch, 3);
        let theta = Array1::from_elem(p, 0.05);
        group.bench_with_input(BenchmarkId::from_parameter(p), &p, |b, _| {
            b.iter(|| {
                let mut t = theta.clone();
                let mut w = params.weights[0].clone();
                hier_prox_in_place(&mut t, &mut w, black_box(0.01), 1.0).unwrap();
                (t, w)
            })
        });
    }
    group.finish();
}

fn network_epoch(c: &mut Criterion) {
    let mut group = c.benchmark_group("network_epoch");
    group.sample_size(20);
    for n in [200, 1000] {
        let data = dataset(n, 10);
        let x = data.covariates().view();
        let cfg = PathConfig::default();
        let mut params = init_params(&cfg.architecture(10).unwrap(), 5);
        params.theta.fill(0.1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| {
                let cache = forward_cached(&params, x, Mode::Train, 11).unwrap();
                let (_, g) = loss_and_gradient(cache.scores.view(), &data).unwrap();
                backprop_cached(&params, x, &cache, g.view()).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, partial_likelihood, hier_prox, network_epoch);
criterion_main!(benches);
