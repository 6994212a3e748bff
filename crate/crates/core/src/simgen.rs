//! Simulation designs with AR(1)-correlated Gaussian covariates, Cox event
//! times from inverse-transform sampling with `h_0(t) = 1`, and uniform
//! censoring.
//!
//! Every scenario seed drives a ChaCha8 generator (`rand_chacha` 0.3) with
//! three separate streams: covariates, event times and censoring times. The
//! event and censoring draws are therefore independent given `x`.

use std::collections::BTreeSet;

use ndarray::{Array1, Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::survival::SurvivalDataset;

const COVARIATE_STREAM: u64 = 0;
const EVENT_STREAM: u64 = 1;
const CENSOR_STREAM: u64 = 2;

/// Coefficients of the linear design.
pub const MODEL1_BETA: [f64; 10] = [0.8, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.6, 0.0];

/// Dimension of the signal part of every design.
pub const SIGNAL_DIM: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// `psi(x) = 0.8 x1 + x4 + 0.6 x9`
    Model1,
    /// `psi(x) = x1 + max(x4, 1) + x4 x9`
    Model2,
    /// `psi(x) = x1^2 + max(x4, 1) + x4 x9`
    Model2Squared,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Model1 => "model1",
            Model::Model2 => "model2",
            Model::Model2Squared => "model2_squared",
        }
    }

    pub fn psi(self, x: ArrayView1<f64>) -> Result<f64> {
        match self {
            Model::Model1 => psi_model1(x),
            Model::Model2 => psi_model2(x),
            Model::Model2Squared => psi_model2_squared(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimScenario {
    pub model: Model,
    pub n: usize,
    /// Total covariates; columns beyond the first ten are pure noise.
    pub p: usize,
    pub rho: f64,
    /// Upper bound of the uniform censoring distribution.
    pub c: f64,
    pub seed: u64,
}

impl SimScenario {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::InvalidRho(self.rho));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidC(self.c));
        }
        if self.p < SIGNAL_DIM {
            return Err(Error::DimensionMismatch { expected: SIGNAL_DIM, actual: self.p });
        }
        if self.n < 2 {
            return Err(Error::EmptyOrSingleton(self.n));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedData {
    pub dataset: SurvivalDataset,
    /// 1-based indices of the features entering the hazard.
    pub true_features: BTreeSet<usize>,
    pub true_event_times: Array1<f64>,
    pub censor_rate: f64,
}

fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Rows i.i.d. `N(0, S)` with `S_ij = rho^|i-j|`, via the AR(1) recursion.
pub fn gen_covariates(n: usize, p: usize, rho: f64, seed: u64) -> Result<Array2<f64>> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidRho(rho));
    }
    let mut rng = stream(seed, COVARIATE_STREAM);
    Ok(sample_ar1(&mut rng, n, p, rho))
}

fn sample_ar1<R: Rng>(rng: &mut R, n: usize, p: usize, rho: f64) -> Array2<f64> {
    let innovation = (1.0 - rho * rho).sqrt();
    let mut x = Array2::zeros((n, p));
    for mut row in x.rows_mut() {
        let mut prev = 0.0;
        for j in 0..p {
            let z: f64 = rng.sample(StandardNormal);
            prev = if j == 0 { z } else { rho * prev + innovation * z };
            row[j] = prev;
        }
    }
    x
}

fn check_signal(x: ArrayView1<f64>) -> Result<()> {
    if x.len() != SIGNAL_DIM {
        return Err(Error::DimensionMismatch { expected: SIGNAL_DIM, actual: x.len() });
    }
    Ok(())
}

pub fn psi_model1(x: ArrayView1<f64>) -> Result<f64> {
    check_signal(x)?;
    Ok(MODEL1_BETA.iter().zip(x.iter()).map(|(b, v)| b * v).sum())
}

pub fn psi_model2(x: ArrayView1<f64>) -> Result<f64> {
    check_signal(x)?;
    Ok(x[0] + x[3].max(1.0) + x[3] * x[8])
}

pub fn psi_model2_squared(x: ArrayView1<f64>) -> Result<f64> {
    check_signal(x)?;
    Ok(x[0] * x[0] + x[3].max(1.0) + x[3] * x[8])
}

/// `T_i = -log(U_i) exp(-psi_i)` with `U_i ~ U(0, 1)`.
pub fn gen_event_times(psi: ArrayView1<f64>, seed: u64) -> Array1<f64> {
    let mut rng = stream(seed, EVENT_STREAM);
    event_times_from(&mut rng, psi)
}

fn event_times_from<R: Rng>(rng: &mut R, psi: ArrayView1<f64>) -> Array1<f64> {
    psi.mapv(|s| {
        let u: f64 = rng.sample(Open01);
        -u.ln() * (-s).exp()
    })
}

/// `Y = min(T, C)`, `delta = 1(T <= C)` with `C ~ U(0, c)`.
pub fn apply_censoring(t: ArrayView1<f64>, c: f64, seed: u64) -> Result<(Array1<f64>, Vec<bool>)> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidC(c));
    }
    let mut rng = stream(seed, CENSOR_STREAM);
    let censor: Vec<f64> = (0..t.len()).map(|_| rng.gen_range(0.0..c)).collect();
    let y = t.iter().zip(&censor).map(|(&ti, &ci)| ti.min(ci)).collect();
    let delta = t.iter().zip(&censor).map(|(&ti, &ci)| ti <= ci).collect();
    Ok((y, delta))
}

pub fn true_features(_model: Model) -> BTreeSet<usize> {
    BTreeSet::from([1, 4, 9])
}

pub fn generate(scenario: &SimScenario) -> Result<GeneratedData> {
    scenario.validate()?;
    let x = gen_covariates(scenario.n, scenario.p, scenario.rho, scenario.seed)?;
    let psi = x
        .rows()
        .into_iter()
        .map(|row| scenario.model.psi(row.slice(ndarray::s![..SIGNAL_DIM])))
        .collect::<Result<Array1<f64>>>()?;
    let t = gen_event_times(psi.view(), scenario.seed);
    let (y, delta) = apply_censoring(t.view(), scenario.c, scenario.seed)?;
    let dataset = SurvivalDataset::new(y.to_vec(), delta, x)?;
    Ok(GeneratedData {
        censor_rate: dataset.censor_rate(),
        dataset,
        true_features: true_features(scenario.model),
        true_event_times: t,
    })
}
