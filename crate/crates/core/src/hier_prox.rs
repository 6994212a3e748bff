//! Hierarchical proximal operator.
//!
//! For one input feature with residual coefficient `b` and first-layer column
//! `w`, solves
//!
//! ```text
//! minimize  1/2 (theta - b)^2 + 1/2 |W - w|^2 + lambda_step |theta|
//! subject to  |W|_inf <= M |theta|
//! ```
//!
//! For fixed `|theta| = t` the optimal `W` clips `w` to `[-M t, M t]`, and the
//! reduced objective in `t` is convex. If the `m` largest `|w_j|` are clipped,
//! its stationary point is `t = S(|b| + M sum_{j<=m} |w_(j)|, lambda_step) / (1 + m M^2)`.
//! Every candidate `m = 0..=d` is evaluated and the best feasible one kept.

use ndarray::{Array1, Array2, ArrayView1, ArrayViewMut1, Axis};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ProxInput {
    /// Residual coefficient after the gradient step.
    pub b: f64,
    /// First-layer column after the gradient step.
    pub w: Array1<f64>,
    pub lambda_step: f64,
    /// Hierarchy coefficient, may be `f64::INFINITY`.
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxOutput {
    pub theta: f64,
    pub w: Array1<f64>,
}

pub fn soft_threshold(x: f64, threshold: f64) -> f64 {
    x.signum() * (x.abs() - threshold).max(0.0)
}

/// Objective of the proximal problem at `(theta, w_out)`. Infeasible points give `+inf`.
pub fn prox_objective(input: &ProxInput, theta: f64, w_out: ArrayView1<f64>) -> f64 {
    let bound = input.m * theta.abs();
    let max_w = w_out.fold(0.0f64, |a, v| a.max(v.abs()));
    // 0 * inf is NaN; an unbounded cone is always feasible
    if input.m.is_finite() && max_w > bound + 1e-12 {
        return f64::INFINITY;
    }
    let dw: f64 = input.w.iter().zip(w_out.iter()).map(|(a, b)| (a - b).powi(2)).sum();
    0.5 * (theta - input.b).powi(2) + 0.5 * dw + input.lambda_step * theta.abs()
}

fn solve_in_place(b: f64, mut w: ArrayViewMut1<f64>, lambda_step: f64, m: f64, order: &mut Vec<usize>) -> f64 {
    if m.is_infinite() {
        return soft_threshold(b, lambda_step);
    }
    if m <= 0.0 {
        w.fill(0.0);
        return soft_threshold(b, lambda_step);
    }

    order.clear();
    order.extend(0..w.len());
    // descending magnitude, lower index first on ties (sort is stable)
    order.sort_by(|&i, &j| w[j].abs().partial_cmp(&w[i].abs()).expect("finite weights"));

    let abs_b = b.abs();
    let reduced = |t: f64| {
        let cap = m * t;
        let clipped: f64 = w.iter().map(|v| (v.abs() - cap).max(0.0).powi(2)).sum();
        0.5 * (t - abs_b).powi(2) + lambda_step * t + 0.5 * clipped
    };

    let mut best_t = 0.0;
    let mut best_obj = reduced(0.0);
    let mut prefix = 0.0;
    for count in 0..=order.len() {
        if count > 0 {
            prefix += w[order[count - 1]].abs();
        }
        let t = (abs_b + m * prefix - lambda_step).max(0.0) / (1.0 + count as f64 * m * m);
        let upper = if count == 0 { f64::INFINITY } else { w[order[count - 1]].abs() };
        let lower = if count == order.len() { 0.0 } else { w[order[count]].abs() };
        let cap = m * t;
        // candidate is the stationary point of the piece it claims
        if cap <= upper && cap >= lower {
            let obj = reduced(t);
            if obj < best_obj {
                best_obj = obj;
                best_t = t;
            }
        }
    }

    let cap = m * best_t;
    w.mapv_inplace(|v| v.signum() * v.abs().min(cap));
    // b == 0 with a large column: either sign is optimal, take the positive one
    if b < 0.0 {
        -best_t
    } else {
        best_t
    }
}

/// Exact minimiser for one feature.
pub fn hier_prox_single(input: &ProxInput) -> ProxOutput {
    let mut w = input.w.clone();
    let mut scratch = Vec::new();
    let theta = solve_in_place(input.b, w.view_mut(), input.lambda_step, input.m, &mut scratch);
    ProxOutput { theta, w }
}

/// Apply [`hier_prox_single`] to every feature: entry `i` of `theta` with
/// column `i` of `w0` (shape `d_1 x p`).
pub fn hier_prox_batch(
    theta: &Array1<f64>,
    w0: &Array2<f64>,
    lambda_step: f64,
    m: f64,
) -> Result<(Array1<f64>, Array2<f64>)> {
    let mut theta = theta.clone();
    let mut w0 = w0.clone();
    hier_prox_in_place(&mut theta, &mut w0, lambda_step, m)?;
    Ok((theta, w0))
}

/// In-place variant of [`hier_prox_batch`].
pub fn hier_prox_in_place(theta: &mut Array1<f64>, w0: &mut Array2<f64>, lambda_step: f64, m: f64) -> Result<()> {
    if theta.len() != w0.ncols() {
        return Err(Error::DimensionMismatch { expected: w0.ncols(), actual: theta.len() });
    }
    let mut scratch = Vec::with_capacity(w0.nrows());
    for (t, col) in theta.iter_mut().zip(w0.axis_iter_mut(Axis(1))) {
        *t = solve_in_place(*t, col, lambda_step, m, &mut scratch);
    }
    Ok(())
}

/// Brute-force minimiser: scan `theta` over a grid and clip `w` for each.
///
/// The grid spans `[-(|b| + M|w|_1 + 1), +(...)]`, which contains the
/// minimiser. Used as a test oracle.
pub fn hier_prox_oracle(input: &ProxInput, grid_step: f64) -> ProxOutput {
    assert!(grid_step > 0.0, "grid_step must be positive");
    let clip = |theta: f64| -> Array1<f64> {
        if input.m.is_infinite() {
            input.w.clone()
        } else {
            let cap = input.m * theta.abs();
            input.w.mapv(|v| v.signum() * v.abs().min(cap))
        }
    };
    let l1: f64 = input.w.iter().map(|v| v.abs()).sum();
    let reach = if input.m.is_finite() { input.b.abs() + input.m * l1 + 1.0 } else { input.b.abs() + 1.0 };
    let steps = (reach / grid_step).ceil() as i64;
    let mut best = (0.0, clip(0.0));
    let mut best_obj = prox_objective(input, best.0, best.1.view());
    for k in -steps..=steps {
        let theta = k as f64 * grid_step;
        let w = clip(theta);
        let obj = prox_objective(input, theta, w.view());
        if obj < best_obj {
            best_obj = obj;
            best = (theta, w);
        }
    }
    ProxOutput { theta: best.0, w: best.1 }
}
