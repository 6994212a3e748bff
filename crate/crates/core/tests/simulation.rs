use coxnet::simgen::gen_covariates;
use coxnet::{generate, Model, SimScenario};
use ndarray::Axis;

/// Asymptotic Kolmogorov critical value at level 0.01.
const KS_CRITICAL_01: f64 = 1.627_62;

fn ks_exponential(mut sample: Vec<f64>) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let cdf = 1.0 - (-v).exp();
            (cdf - i as f64 / n).abs().max(((i + 1) as f64 / n - cdf).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn scaled_event_times_are_unit_exponential() {
    let n = 10_000;
    for (model, seed) in [(Model::Model1, 1), (Model::Model2, 2), (Model::Model2Squared, 3)] {
        let g = generate(&SimScenario { model, n, p: 10, rho: 0.5, c: 2.0, seed }).unwrap();
        let x = g.dataset.covariates();
        let scaled: Vec<f64> = x
            .rows()
            .into_iter()
            .zip(g.true_event_times.iter())
            .map(|(row, &t)| t * model.psi(row).unwrap().exp())
            .collect();
        let d = ks_exponential(scaled);
        println!("{}: KS statistic {d:.5}", model.name());
        assert!(d * (n as f64).sqrt() < KS_CRITICAL_01, "{}: D = {d}", model.name());
    }
}

#[test]
fn covariates_follow_the_ar1_correlation() {
    let (n, p) = (100_000, 10);
    for rho in [0.0, 0.5, 0.8] {
        let x = gen_covariates(n, p, rho, 17).unwrap();
        let mean = x.mean_axis(Axis(0)).unwrap();
        let centred = &x - &mean;
        let cov = centred.t().dot(&centred) / (n as f64 - 1.0);
        let mut worst = 0.0f64;
        for i in 0..p {
            for j in 0..p {
                let corr = cov[[i, j]] / (cov[[i, i]] * cov[[j, j]]).sqrt();
                let target = rho.powi((i as i32 - j as i32).abs());
                worst = worst.max((corr - target).abs());
            }
        }
        assert!(worst < 0.02, "rho {rho}: max deviation {worst}");
    }
}

#[test]
fn observed_times_are_minimum_of_event_and_censoring() {
    let g = generate(&SimScenario { model: Model::Model1, n: 500, p: 12, rho: 0.3, c: 2.0, seed: 4 }).unwrap();
    let ds = &g.dataset;
    for i in 0..ds.n() {
        let t = g.true_event_times[i];
        if ds.events()[i] {
            assert_eq!(ds.times()[i], t);
        } else {
            assert!(ds.times()[i] < t);
        }
    }
    assert_eq!(ds.p(), 12);
    assert_eq!(g.censor_rate, ds.censor_rate());
}
