//! Dense-to-sparse training along a geometric penalty path.
//!
//! The network is first trained without penalty, then `lambda` grows by a
//! factor `1 + eps` per step. Each step runs `E` full-batch epochs of a
//! gradient step on the negative log partial likelihood followed by the
//! hierarchical proximal operator with threshold `alpha * lambda`. The path
//! stops once every residual coefficient is zero, and features are ranked by
//! how long they survive.

use std::collections::BTreeSet;

use ndarray::{Array1, ArrayView2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hier_prox::hier_prox_in_place;
use crate::resnet::{backprop_cached, forward_batch, forward_cached, init_params, Architecture, Mode, NetworkParams};
use crate::survival::{loss_and_gradient, neg_log_partial_likelihood, SurvivalDataset};

/// Cap on the number of lambda steps of one path.
pub const MAX_LAMBDA_STEPS: usize = 10_000;

/// Smallest automatic starting lambda, used when the dense gradient vanishes.
const MIN_AUTO_LAMBDA: f64 = 1e-6;

/// Starting value of the penalty path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaInit {
    /// `0.01 * max_i |d(-log L)/d theta_i| / alpha` at the dense solution.
    Auto,
    Value(f64),
}

impl Serialize for LambdaInit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            LambdaInit::Auto => s.serialize_str("auto"),
            LambdaInit::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for LambdaInit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(LambdaInit::Value(v)),
            Raw::Str(s) if s == "auto" => Ok(LambdaInit::Auto),
            Raw::Str(s) => {
                Err(serde::de::Error::custom(format!("lambda_init must be a number or \"auto\", got {s:?}")))
            }
        }
    }
}

/// Serde adapter writing an infinite hierarchy coefficient as `"inf"`.
pub mod hierarchy_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &f64, s: S) -> Result<S::Ok, S::Error> {
        if m.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*m)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) if s == "inf" || s == "infinity" => Ok(f64::INFINITY),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("hierarchy must be a number or \"inf\", got {s:?}"))),
        }
    }
}

/// Step size and penalty schedule shared by the network path and the linear
/// lasso path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LambdaSchedule {
    pub epochs_per_lambda: usize,
    pub learning_rate: f64,
    pub path_multiplier: f64,
    pub lambda_init: LambdaInit,
    pub dense_epochs: usize,
}

impl Default for LambdaSchedule {
    fn default() -> Self {
        Self {
            epochs_per_lambda: 10,
            learning_rate: 1e-3,
            path_multiplier: 0.02,
            lambda_init: LambdaInit::Auto,
            dense_epochs: 100,
        }
    }
}

impl LambdaSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.epochs_per_lambda == 0 {
            return Err(Error::InvalidConfig("epochs_per_lambda must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning_rate must be positive".into()));
        }
        if !(self.path_multiplier > 0.0 && self.path_multiplier.is_finite()) {
            return Err(Error::InvalidConfig("path_multiplier must be positive".into()));
        }
        if let LambdaInit::Value(v) = self.lambda_init {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig("lambda_init must be positive".into()));
            }
        }
        Ok(())
    }

    /// Resolve the starting lambda from the residual-coefficient gradient.
    pub(crate) fn starting_lambda(&self, theta_grad: &Array1<f64>) -> f64 {
        match self.lambda_init {
            LambdaInit::Value(v) => v,
            LambdaInit::Auto => {
                let g = theta_grad.fold(0.0f64, |a, v| a.max(v.abs()));
                (0.01 * g / self.learning_rate).max(MIN_AUTO_LAMBDA)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathConfig {
    pub epochs_per_lambda: usize,
    pub learning_rate: f64,
    pub path_multiplier: f64,
    /// Hierarchy coefficient `M`; `f64::INFINITY` removes the constraint.
    #[serde(with = "hierarchy_serde")]
    pub hierarchy: f64,
    pub lambda_init: LambdaInit,
    pub dense_epochs: usize,
    pub seed: u64,
    /// Hidden layer widths.
    pub hidden: Vec<usize>,
    pub dropout_rate: f64,
}

impl Default for PathConfig {
    fn default() -> Self {
        let s = LambdaSchedule::default();
        Self {
            epochs_per_lambda: s.epochs_per_lambda,
            learning_rate: s.learning_rate,
            path_multiplier: s.path_multiplier,
            hierarchy: 1.0,
            lambda_init: s.lambda_init,
            dense_epochs: s.dense_epochs,
            seed: 0,
            hidden: vec![30, 30, 30],
            dropout_rate: 0.2,
        }
    }
}

impl PathConfig {
    pub fn schedule(&self) -> LambdaSchedule {
        LambdaSchedule {
            epochs_per_lambda: self.epochs_per_lambda,
            learning_rate: self.learning_rate,
            path_multiplier: self.path_multiplier,
            lambda_init: self.lambda_init,
            dense_epochs: self.dense_epochs,
        }
    }

    pub fn architecture(&self, inputs: usize) -> Result<Architecture> {
        Architecture::new(inputs, self.hidden.clone(), self.dropout_rate)
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule().validate()?;
        if self.hierarchy.is_nan() || self.hierarchy < 0.0 {
            return Err(Error::InvalidConfig("hierarchy must be nonnegative".into()));
        }
        self.architecture(1).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub lambda: f64,
    pub active_count: usize,
    pub theta_snapshot: Vec<f64>,
    /// Eval-mode negative log partial likelihood on the training data.
    pub train_loss: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub validation_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub points: Vec<PathPoint>,
    /// Lambda at which each feature left the model for good.
    pub drop_lambda: Vec<f64>,
    /// `|theta_i|` just before the final departure, used to break ties.
    pub drop_magnitude: Vec<f64>,
    /// 1-based feature indices, most important first.
    pub ranking: Vec<usize>,
    pub lambda_init: f64,
    /// Residual coefficients at the start of the path.
    pub initial_theta: Vec<f64>,
    pub config: PathConfig,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Dropout seed for `(seed, lambda step, epoch)`; step 0 is the dense phase.
pub fn mask_seed(seed: u64, step: u64, epoch: u64) -> u64 {
    splitmix(splitmix(splitmix(seed) ^ step) ^ epoch)
}

struct Trainer<'a> {
    data: &'a SurvivalDataset,
    x: ArrayView2<'a, f64>,
    lr: f64,
}

impl Trainer<'_> {
    /// One full-batch gradient step; returns the train-mode loss before the step.
    fn step(&self, params: &mut NetworkParams, seed: u64) -> Result<f64> {
        let cache = forward_cached(params, self.x, Mode::Train, seed)?;
        let (loss, grad) = loss_and_gradient(cache.scores.view(), self.data)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss(format!("loss {loss}")));
        }
        let grads = backprop_cached(params, self.x, &cache, grad.view())?;
        params.descend(&grads, self.lr);
        if !params.is_finite() {
            return Err(Error::NonFiniteLoss("parameters diverged".into()));
        }
        Ok(loss)
    }

    fn eval_loss(&self, params: &NetworkParams) -> Result<f64> {
        let scores = forward_batch(params, self.x, Mode::Eval, 0)?;
        let loss = neg_log_partial_likelihood(scores.view(), self.data)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss(format!("loss {loss}")));
        }
        Ok(loss)
    }

    fn theta_gradient(&self, params: &NetworkParams) -> Result<Array1<f64>> {
        let scores = forward_batch(params, self.x, Mode::Eval, 0)?;
        let (_, grad) = loss_and_gradient(scores.view(), self.data)?;
        Ok(self.x.t().dot(&grad))
    }
}

/// Unpenalised full-batch training from the seeded initialisation.
pub fn train_dense(data: &SurvivalDataset, config: &PathConfig) -> Result<NetworkParams> {
    config.validate()?;
    let arch = config.architecture(data.p())?;
    let mut params = init_params(&arch, config.seed);
    let trainer = Trainer { data, x: data.covariates().view(), lr: config.learning_rate };
    for epoch in 0..config.dense_epochs {
        trainer.step(&mut params, mask_seed(config.seed, 0, epoch as u64))?;
    }
    trainer.eval_loss(&params)?;
    Ok(params)
}

pub fn train_path(data: &SurvivalDataset, config: &PathConfig) -> Result<PathResult> {
    train_path_with_validation(data, None, config)
}

/// [`train_path`], additionally scoring every path point on `validation`.
pub fn train_path_with_validation(
    data: &SurvivalDataset,
    validation: Option<&SurvivalDataset>,
    config: &PathConfig,
) -> Result<PathResult> {
    train_path_inspect(data, validation, config, |_| {})
}

/// [`train_path_with_validation`] calling `inspect` with the parameters after
/// the initial projection and after every proximal epoch.
pub fn train_path_inspect<F: FnMut(&NetworkParams)>(
    data: &SurvivalDataset,
    validation: Option<&SurvivalDataset>,
    config: &PathConfig,
    mut inspect: F,
) -> Result<PathResult> {
    if let Some(v) = validation {
        if v.p() != data.p() {
            return Err(Error::DimensionMismatch { expected: data.p(), actual: v.p() });
        }
    }
    let mut params = train_dense(data, config)?;
    let trainer = Trainer { data, x: data.covariates().view(), lr: config.learning_rate };
    let lambda_init = config.schedule().starting_lambda(&trainer.theta_gradient(&params)?);

    // Start from a feasible point: project W_0 onto the hierarchy constraint.
    let (theta, w0) = (&mut params.theta, &mut params.weights[0]);
    hier_prox_in_place(theta, w0, 0.0, config.hierarchy)?;
    let initial_theta = params.theta.to_vec();
    inspect(&params);

    let mut points = Vec::new();
    let mut lambda = lambda_init;
    for step in 1..=MAX_LAMBDA_STEPS {
        lambda *= 1.0 + config.path_multiplier;
        let threshold = config.learning_rate * lambda;
        for epoch in 0..config.epochs_per_lambda {
            trainer.step(&mut params, mask_seed(config.seed, step as u64, epoch as u64))?;
            let (theta, w0) = (&mut params.theta, &mut params.weights[0]);
            hier_prox_in_place(theta, w0, threshold, config.hierarchy)?;
            inspect(&params);
        }
        let train_loss = trainer.eval_loss(&params)?;
        let validation_loss = match validation {
            Some(v) => {
                let s = forward_batch(&params, v.covariates().view(), Mode::Eval, 0)?;
                Some(neg_log_partial_likelihood(s.view(), v)?)
            }
            None => None,
        };
        let active_count = params.theta.iter().filter(|&&t| t != 0.0).count();
        points.push(PathPoint {
            lambda,
            active_count,
            theta_snapshot: params.theta.to_vec(),
            train_loss,
            validation_loss,
        });
        if active_count == 0 {
            let (drop_lambda, drop_magnitude) = departures(&points, &initial_theta);
            let ranking = rank_by_drop(&drop_lambda, &drop_magnitude);
            return Ok(PathResult {
                points,
                drop_lambda,
                drop_magnitude,
                ranking,
                lambda_init,
                initial_theta,
                config: config.clone(),
            });
        }
    }
    Err(Error::NoTermination(MAX_LAMBDA_STEPS))
}

/// Point at which each coefficient becomes zero and stays zero.
///
/// Returns the lambda of that point and `|coef|` at the point before it (or
/// `initial` when the coefficient was zero from the first point on).
pub(crate) fn departures(points: &[PathPoint], initial: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let p = initial.len();
    let mut lambdas = Vec::with_capacity(p);
    let mut magnitudes = Vec::with_capacity(p);
    for i in 0..p {
        let last_active = points.iter().rposition(|pt| pt.theta_snapshot[i] != 0.0);
        let (drop_at, before) = match last_active {
            Some(j) => (j + 1, points[j].theta_snapshot[i].abs()),
            None => (0, initial[i].abs()),
        };
        let drop_at = drop_at.min(points.len() - 1);
        lambdas.push(points[drop_at].lambda);
        magnitudes.push(before);
    }
    (lambdas, magnitudes)
}

/// Sort features by departure lambda (descending), then by the magnitude
/// before departure (descending), then by index. Returns 1-based indices.
pub fn rank_by_drop(drop_lambda: &[f64], drop_magnitude: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..drop_lambda.len()).collect();
    order.sort_by(|&a, &b| {
        drop_lambda[b].total_cmp(&drop_lambda[a]).then(drop_magnitude[b].total_cmp(&drop_magnitude[a])).then(a.cmp(&b))
    });
    order.into_iter().map(|i| i + 1).collect()
}

pub fn rank_features(result: &PathResult) -> &[usize] {
    &result.ranking
}

/// First `k` entries of a 1-based ranking.
pub fn select_top_k(ranking: &[usize], k: usize) -> Result<BTreeSet<usize>> {
    if k == 0 || k > ranking.len() {
        return Err(Error::KOutOfRange { k, p: ranking.len() });
    }
    Ok(ranking[..k].iter().copied().collect())
}

/// Default grid for choosing the hierarchy coefficient.
pub const HIERARCHY_GRID: [f64; 4] = [0.1, 1.0, 10.0, 100.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchySelection {
    pub best: f64,
    /// `(M, best validation loss along the path)` per grid value.
    pub scores: Vec<(f64, f64)>,
    pub validation_fraction: f64,
}

/// Choose `M` by the lowest held-out negative log partial likelihood reached
/// along the path, with a seeded 80/20 split.
pub fn select_hierarchy(
    data: &SurvivalDataset,
    config: &PathConfig,
    grid: &[f64],
    seed: u64,
) -> Result<HierarchySelection> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("hierarchy grid is empty".into()));
    }
    let fraction = 0.2;
    let (train, validation) = holdout_split(data, fraction, seed)?;
    let mut scores = Vec::with_capacity(grid.len());
    for &m in grid {
        let cfg = PathConfig { hierarchy: m, ..config.clone() };
        let result = train_path_with_validation(&train, Some(&validation), &cfg)?;
        let best = result.points.iter().filter_map(|p| p.validation_loss).fold(f64::INFINITY, f64::min);
        scores.push((m, best));
    }
    let best = scores.iter().min_by(|a, b| a.1.total_cmp(&b.1)).map(|s| s.0).expect("grid is nonempty");
    Ok(HierarchySelection { best, scores, validation_fraction: fraction })
}

fn holdout_split(data: &SurvivalDataset, fraction: f64, seed: u64) -> Result<(SurvivalDataset, SurvivalDataset)> {
    let n = data.n();
    let n_val = ((n as f64 * fraction).round() as usize).clamp(2, n.saturating_sub(2));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (val, train) = idx.split_at(n_val);
    let mut val = val.to_vec();
    let mut train = train.to_vec();
    val.sort_unstable();
    train.sort_unstable();
    Ok((data.subset_rows(&train)?, data.subset_rows(&val)?))
}
