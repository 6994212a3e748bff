//! Linear Cox comparators.
//!
//! `fit_cox_classical` maximises the partial likelihood by damped Newton
//! steps and reports Wald p-values. `fit_cox_lasso_path` runs proximal
//! gradient descent on the l1-penalised partial likelihood along the same
//! geometric schedule as the network path, so the two are directly
//! comparable.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::hier_prox::soft_threshold;
use crate::path::{departures, rank_by_drop, LambdaSchedule, PathPoint, MAX_LAMBDA_STEPS};
use crate::survival::{loss_and_gradient, neg_log_partial_likelihood, SurvivalDataset};

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_TOL: f64 = 1e-8;
const MAX_HALVINGS: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoxFit {
    pub beta: Vec<f64>,
    pub std_err: Vec<f64>,
    pub p_values: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub neg_log_likelihood: f64,
    /// `-log L` at the start and after every accepted Newton step.
    pub loss_history: Vec<f64>,
}

/// Loss, gradient and Hessian of `-log L(beta)` for the linear predictor `X beta`.
pub fn cox_derivatives(beta: ArrayView1<f64>, data: &SurvivalDataset) -> Result<(f64, Array1<f64>, Array2<f64>)> {
    let p = data.p();
    if beta.len() != p {
        return Err(Error::DimensionMismatch { expected: p, actual: beta.len() });
    }
    let x = data.covariates();
    let eta = x.dot(&beta);
    let shift = eta.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let order = data.sort_index();
    let mut s0 = 0.0;
    let mut s1 = Array1::<f64>::zeros(p);
    let mut s2 = Array2::<f64>::zeros((p, p));
    let mut loss = 0.0;
    let mut grad = Array1::<f64>::zeros(p);
    let mut hess = Array2::<f64>::zeros((p, p));
    for group in data.tie_groups() {
        for &i in &order[group.clone()] {
            let w = (eta[i] - shift).exp();
            let xi = x.row(i);
            s0 += w;
            s1.scaled_add(w, &xi);
            for a in 0..p {
                let wa = w * xi[a];
                for b in 0..=a {
                    s2[[a, b]] += wa * xi[b];
                }
            }
        }
        let mean = &s1 / s0;
        for &i in &order[group.clone()] {
            if !data.events()[i] {
                continue;
            }
            loss -= eta[i] - shift - s0.ln();
            grad -= &(&x.row(i) - &mean);
            for a in 0..p {
                for b in 0..=a {
                    hess[[a, b]] += s2[[a, b]] / s0 - mean[a] * mean[b];
                }
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            hess[[b, a]] = hess[[a, b]];
        }
    }
    Ok((loss, grad, hess))
}

fn to_nalgebra(h: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(h.nrows(), h.ncols(), |i, j| h[[i, j]])
}

/// Wald p-value `2 (1 - Phi(|z|))`, computed through `erfc` to keep tiny values.
pub fn wald_p_value(beta: f64, std_err: f64) -> f64 {
    if !(std_err > 0.0) || !std_err.is_finite() {
        return 1.0;
    }
    erfc((beta / std_err).abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

/// Newton-Raphson with step halving from `beta = 0`.
///
/// Non-convergence (100 iterations, exhausted halvings, or an information
/// matrix that degenerates along the way) returns the last iterate with
/// `converged = false`.
pub fn fit_cox_classical(data: &SurvivalDataset) -> Result<CoxFit> {
    let p = data.p();
    let mut beta = Array1::<f64>::zeros(p);
    let (mut loss, mut grad, mut hess) = cox_derivatives(beta.view(), data)?;
    let mut chol = to_nalgebra(&hess).cholesky().ok_or(Error::SingularHessian)?;
    let mut converged = false;
    let mut iterations = 0;
    let mut loss_history = vec![loss];

    while iterations < NEWTON_MAX_ITER {
        iterations += 1;
        let step = chol.solve(&DVector::from_iterator(p, grad.iter().copied()));
        let step = Array1::from_iter(step.iter().copied());
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = &beta - &(&step * scale);
            let trial_loss = neg_log_partial_likelihood(data.covariates().dot(&trial).view(), data)?;
            if trial_loss.is_finite() && trial_loss <= loss {
                accepted = Some(trial);
                break;
            }
            scale *= 0.5;
        }
        let Some(next) = accepted else { break };
        let delta = (&next - &beta).fold(0.0f64, |a, v| a.max(v.abs()));
        let (l, g, h) = cox_derivatives(next.view(), data)?;
        beta = next;
        loss = l;
        loss_history.push(l);
        grad = g;
        hess = h;
        match to_nalgebra(&hess).cholesky() {
            Some(c) => chol = c,
            None => break,
        }
        if delta < NEWTON_TOL {
            converged = true;
            break;
        }
    }

    let var = chol.inverse();
    let std_err: Vec<f64> = (0..p).map(|j| var[(j, j)].max(0.0).sqrt()).collect();
    let p_values = beta.iter().zip(&std_err).map(|(&b, &s)| wald_p_value(b, s)).collect();
    Ok(CoxFit { beta: beta.to_vec(), std_err, p_values, converged, iterations, neg_log_likelihood: loss, loss_history })
}

/// Ascending p-value, ties by `|beta|` descending then index. 1-based.
pub fn rank_by_pvalue(fit: &CoxFit) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fit.p_values.len()).collect();
    order.sort_by(|&a, &b| {
        fit.p_values[a]
            .total_cmp(&fit.p_values[b])
            .then(fit.beta[b].abs().total_cmp(&fit.beta[a].abs()))
            .then(a.cmp(&b))
    });
    order.into_iter().map(|i| i + 1).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoCoxPath {
    pub lambdas: Vec<f64>,
    pub beta_snapshots: Vec<Vec<f64>>,
    pub train_loss: Vec<f64>,
    pub drop_lambda: Vec<f64>,
    pub drop_magnitude: Vec<f64>,
    pub ranking: Vec<usize>,
    pub lambda_init: f64,
    pub initial_beta: Vec<f64>,
}

fn score_gradient(beta: &Array1<f64>, data: &SurvivalDataset) -> Result<(f64, Array1<f64>)> {
    let x = data.covariates();
    let (loss, g) = loss_and_gradient(x.dot(beta).view(), data)?;
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss(format!("loss {loss}")));
    }
    Ok((loss, x.t().dot(&g)))
}

/// Proximal-gradient l1 Cox path.
///
/// Starts from `init` when given, otherwise from `dense_epochs` plain gradient
/// steps away from zero. Each lambda step runs `epochs_per_lambda` iterations
/// of `beta <- S(beta - alpha grad, alpha lambda)`.
pub fn fit_cox_lasso_path(
    data: &SurvivalDataset,
    schedule: &LambdaSchedule,
    init: Option<&[f64]>,
) -> Result<LassoCoxPath> {
    schedule.validate()?;
    let lr = schedule.learning_rate;
    let mut beta = match init {
        Some(b) if b.len() != data.p() => return Err(Error::DimensionMismatch { expected: data.p(), actual: b.len() }),
        Some(b) => Array1::from(b.to_vec()),
        None => {
            let mut beta = Array1::zeros(data.p());
            for _ in 0..schedule.dense_epochs {
                let (_, g) = score_gradient(&beta, data)?;
                beta.scaled_add(-lr, &g);
            }
            beta
        }
    };
    let (_, g) = score_gradient(&beta, data)?;
    let lambda_init = schedule.starting_lambda(&g);
    let initial_beta = beta.to_vec();

    let mut points = Vec::new();
    let mut lambda = lambda_init;
    for _ in 0..MAX_LAMBDA_STEPS {
        lambda *= 1.0 + schedule.path_multiplier;
        let threshold = lr * lambda;
        for _ in 0..schedule.epochs_per_lambda {
            let (_, g) = score_gradient(&beta, data)?;
            beta.scaled_add(-lr, &g);
            beta.mapv_inplace(|b| soft_threshold(b, threshold));
        }
        let (loss, _) = score_gradient(&beta, data)?;
        let active_count = beta.iter().filter(|&&b| b != 0.0).count();
        points.push(PathPoint {
            lambda,
            active_count,
            theta_snapshot: beta.to_vec(),
            train_loss: loss,
            validation_loss: None,
        });
        if active_count == 0 {
            let (drop_lambda, drop_magnitude) = departures(&points, &initial_beta);
            let ranking = rank_by_drop(&drop_lambda, &drop_magnitude);
            return Ok(LassoCoxPath {
                lambdas: points.iter().map(|p| p.lambda).collect(),
                train_loss: points.iter().map(|p| p.train_loss).collect(),
                beta_snapshots: points.into_iter().map(|p| p.theta_snapshot).collect(),
                drop_lambda,
                drop_magnitude,
                ranking,
                lambda_init,
                initial_beta,
            });
        }
    }
    Err(Error::NoTermination(MAX_LAMBDA_STEPS))
}
