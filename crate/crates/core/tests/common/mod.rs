#![allow(dead_code)]

use coxnet::SurvivalDataset;
use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random dataset with integer-valued times (so ties occur) and at least one event.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, p: usize) -> SurvivalDataset {
    let times: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=(n as u32).max(2)) as f64).collect();
    let mut events: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.7)).collect();
    events[rng.gen_range(0..n)] = true;
    let x = Array2::from_shape_simple_fn((n, p), || rng.sample(StandardNormal));
    SurvivalDataset::new(times, events, x).unwrap()
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Array1<f64> {
    Array1::from_shape_simple_fn(n, || scale * rng.sample::<f64, _>(StandardNormal))
}

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Central difference of `f` at `x` along coordinate `i`.
pub fn central_diff(f: &dyn Fn(&Array1<f64>) -> f64, x: &Array1<f64>, i: usize, h: f64) -> f64 {
    let mut up = x.clone();
    let mut down = x.clone();
    up[i] += h;
    down[i] -= h;
    (f(&up) - f(&down)) / (2.0 * h)
}
