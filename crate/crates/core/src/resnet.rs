//! Residual feed-forward network `Phi(x) = theta^T x + g(x)`.
//!
//! `g(x) = W_L s_L(... W_1 s_1(W_0 x))` where `s_l(y) = relu(y - v_l)` is the
//! shifted activation. The first affine map carries no bias; all offsets enter
//! through the shifts `v_1..v_L`. Dropout acts on hidden activations only and
//! uses inverted scaling, so eval mode needs no rescaling.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Architecture {
    /// Number of input covariates `p`.
    pub inputs: usize,
    /// Widths of the hidden layers `d_1..d_L`.
    pub hidden: Vec<usize>,
    #[serde(default)]
    pub dropout_rate: f64,
}

impl Architecture {
    pub fn new(inputs: usize, hidden: Vec<usize>, dropout_rate: f64) -> Result<Self> {
        let arch = Self { inputs, hidden, dropout_rate };
        arch.validate()?;
        Ok(arch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs == 0 || self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::InvalidConfig(
                "architecture needs positive input and hidden widths and at least one hidden layer".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::InvalidConfig(format!("dropout_rate = {} must lie in [0, 1)", self.dropout_rate)));
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.hidden.len()
    }

    /// `d_0 = p, d_1..d_L, d_{L+1} = 1`.
    pub fn widths(&self) -> Vec<usize> {
        let mut d = Vec::with_capacity(self.hidden.len() + 2);
        d.push(self.inputs);
        d.extend_from_slice(&self.hidden);
        d.push(1);
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub architecture: Architecture,
    /// Residual (linear) layer.
    pub theta: Array1<f64>,
    /// `W_0..W_L`, `W_l` has shape `d_{l+1} x d_l`. Column `i` of `W_0` holds
    /// the first-layer weights of input `i`.
    pub weights: Vec<Array2<f64>>,
    /// Shifts `v_1..v_L`.
    pub biases: Vec<Array1<f64>>,
}

/// Gradients with the same layout as [`NetworkParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrads {
    pub theta: Array1<f64>,
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

/// Glorot-uniform hidden weights, zero shifts and `theta = 0`.
pub fn init_params(arch: &Architecture, seed: u64) -> NetworkParams {
    let d = arch.widths();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = (0..d.len() - 1)
        .map(|l| {
            let bound = (6.0 / (d[l] + d[l + 1]) as f64).sqrt();
            Array2::from_shape_simple_fn((d[l + 1], d[l]), || rng.gen_range(-bound..bound))
        })
        .collect();
    let biases = arch.hidden.iter().map(|&w| Array1::zeros(w)).collect();
    NetworkParams { architecture: arch.clone(), theta: Array1::zeros(arch.inputs), weights, biases }
}

impl NetworkParams {
    /// Every parameter set to zero.
    pub fn zeros(arch: &Architecture) -> Self {
        let d = arch.widths();
        Self {
            architecture: arch.clone(),
            theta: Array1::zeros(arch.inputs),
            weights: (0..d.len() - 1).map(|l| Array2::zeros((d[l + 1], d[l]))).collect(),
            biases: arch.hidden.iter().map(|&w| Array1::zeros(w)).collect(),
        }
    }

    pub fn first_layer(&self) -> &Array2<f64> {
        &self.weights[0]
    }

    /// Gradient step `param -= lr * grad` on every parameter.
    pub fn descend(&mut self, grads: &ParamGrads, lr: f64) {
        self.theta.scaled_add(-lr, &grads.theta);
        for (w, g) in self.weights.iter_mut().zip(&grads.weights) {
            w.scaled_add(-lr, g);
        }
        for (v, g) in self.biases.iter_mut().zip(&grads.biases) {
            v.scaled_add(-lr, g);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.theta.iter().all(|v| v.is_finite())
            && self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    pub fn to_document(&self) -> ParamsDocument {
        ParamsDocument {
            architecture: self.architecture.clone(),
            theta: self.theta.to_vec(),
            weights: self
                .weights
                .iter()
                .map(|w| MatrixDocument { rows: w.nrows(), cols: w.ncols(), data: w.iter().copied().collect() })
                .collect(),
            biases: self.biases.iter().map(|b| b.to_vec()).collect(),
        }
    }

    pub fn from_document(doc: &ParamsDocument) -> Result<Self> {
        doc.architecture.validate()?;
        let d = doc.architecture.widths();
        let mismatch = || Error::InvalidConfig("parameter shapes do not match architecture".into());
        if doc.theta.len() != d[0] || doc.weights.len() != d.len() - 1 || doc.biases.len() != d.len() - 2 {
            return Err(mismatch());
        }
        let mut weights = Vec::with_capacity(doc.weights.len());
        for (l, m) in doc.weights.iter().enumerate() {
            if m.rows != d[l + 1] || m.cols != d[l] {
                return Err(mismatch());
            }
            weights.push(Array2::from_shape_vec((m.rows, m.cols), m.data.clone()).map_err(|_| mismatch())?);
        }
        for (l, b) in doc.biases.iter().enumerate() {
            if b.len() != d[l + 1] {
                return Err(mismatch());
            }
        }
        let params = Self {
            architecture: doc.architecture.clone(),
            theta: Array1::from(doc.theta.clone()),
            weights,
            biases: doc.biases.iter().cloned().map(Array1::from).collect(),
        };
        if !params.is_finite() {
            return Err(Error::NonFiniteValue("network parameters".into()));
        }
        Ok(params)
    }
}

/// JSON checkpoint layout: architecture plus row-major flattened arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDocument {
    pub architecture: Architecture,
    pub theta: Vec<f64>,
    pub weights: Vec<MatrixDocument>,
    pub biases: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDocument {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

/// Intermediate values of one batch forward pass, reused by backprop.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `Phi(x_i)` per row.
    pub scores: Array1<f64>,
    /// `theta^T x_i` per row.
    pub linear: Array1<f64>,
    // W_l a_l for hidden layers l = 0..L-1 (before the shift).
    pre: Vec<Array2<f64>>,
    // post-activation, post-dropout outputs of hidden layers 1..L
    hidden: Vec<Array2<f64>>,
    // scaled keep masks per hidden layer (train mode with dropout only)
    masks: Option<Vec<Array2<f64>>>,
}

impl ForwardCache {
    /// `g(x_i)` per row.
    pub fn nonlinear(&self) -> Array1<f64> {
        &self.scores - &self.linear
    }

    /// Linear pre-activation `W_l a_l` feeding hidden layer `l + 1`.
    pub fn pre_activation(&self, layer: usize) -> &Array2<f64> {
        &self.pre[layer]
    }
}

fn check_input(params: &NetworkParams, cols: usize) -> Result<()> {
    if cols != params.architecture.inputs {
        return Err(Error::DimensionMismatch { expected: params.architecture.inputs, actual: cols });
    }
    Ok(())
}

/// Scaled keep masks for every hidden layer. Row `r` draws from stream `r`
/// of a ChaCha8 generator keyed by `seed`, so masks depend only on
/// `(seed, row)`.
fn dropout_masks(hidden: &[usize], rows: usize, rate: f64, seed: u64) -> Vec<Array2<f64>> {
    let mut masks: Vec<Array2<f64>> = hidden.iter().map(|&w| Array2::zeros((rows, w))).collect();
    let keep = 1.0 / (1.0 - rate);
    for r in 0..rows {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        for mask in masks.iter_mut() {
            for m in mask.row_mut(r).iter_mut() {
                *m = if rng.gen::<f64>() < rate { 0.0 } else { keep };
            }
        }
    }
    masks
}

pub fn forward_cached(params: &NetworkParams, x: ArrayView2<f64>, mode: Mode, seed: u64) -> Result<ForwardCache> {
    check_input(params, x.ncols())?;
    let arch = &params.architecture;
    let depth = arch.depth();
    let masks = (mode == Mode::Train && arch.dropout_rate > 0.0)
        .then(|| dropout_masks(&arch.hidden, x.nrows(), arch.dropout_rate, seed));

    let mut pre = Vec::with_capacity(depth);
    let mut hidden: Vec<Array2<f64>> = Vec::with_capacity(depth);
    for l in 0..depth {
        let z = if l == 0 { x.dot(&params.weights[0].t()) } else { hidden[l - 1].dot(&params.weights[l].t()) };
        let mut a = &z - &params.biases[l];
        a.mapv_inplace(|v| v.max(0.0));
        if let Some(m) = &masks {
            a *= &m[l];
        }
        pre.push(z);
        hidden.push(a);
    }
    let out = hidden[depth - 1].dot(&params.weights[depth].t());
    let linear = x.dot(&params.theta);
    let scores = &linear + &out.column(0);
    Ok(ForwardCache { scores, linear, pre, hidden, masks })
}

/// Scores for every row of `x`.
pub fn forward_batch(params: &NetworkParams, x: ArrayView2<f64>, mode: Mode, seed: u64) -> Result<Array1<f64>> {
    forward_cached(params, x, mode, seed).map(|c| c.scores)
}

/// Score of a single input, using the dropout stream of row 0.
pub fn forward(params: &NetworkParams, x: ArrayView1<f64>, mode: Mode, seed: u64) -> Result<f64> {
    let row = x.insert_axis(Axis(0));
    forward_batch(params, row, mode, seed).map(|s| s[0])
}

/// Gradients of `sum_i loss_grad_i * Phi(x_i)` given a cached forward pass.
pub fn backprop_cached(
    params: &NetworkParams,
    x: ArrayView2<f64>,
    cache: &ForwardCache,
    loss_grad: ArrayView1<f64>,
) -> Result<ParamGrads> {
    check_input(params, x.ncols())?;
    if loss_grad.len() != x.nrows() || cache.scores.len() != x.nrows() {
        return Err(Error::LengthMismatch { expected: x.nrows(), actual: loss_grad.len() });
    }
    let depth = params.architecture.depth();
    let mut weights = vec![Array2::zeros((0, 0)); depth + 1];
    let mut biases = vec![Array1::zeros(0); depth];

    let g = loss_grad.insert_axis(Axis(1)); // n x 1
    weights[depth] = g.t().dot(&cache.hidden[depth - 1]);
    // d loss / d (hidden output of layer L)
    let mut upstream = g.dot(&params.weights[depth]);
    for l in (0..depth).rev() {
        if let Some(m) = &cache.masks {
            upstream *= &m[l];
        }
        let shift = &params.biases[l];
        let mut dz = upstream;
        ndarray::Zip::from(&mut dz).and(&cache.pre[l]).and_broadcast(shift).for_each(|d, &z, &v| {
            if z - v <= 0.0 {
                *d = 0.0;
            }
        });
        biases[l] = -dz.sum_axis(Axis(0));
        weights[l] = if l == 0 { dz.t().dot(&x) } else { dz.t().dot(&cache.hidden[l - 1]) };
        upstream = if l > 0 { dz.dot(&params.weights[l]) } else { Array2::zeros((0, 0)) };
    }
    let theta = x.t().dot(&loss_grad);
    Ok(ParamGrads { theta, weights, biases })
}

/// Forward pass followed by backprop with the same dropout masks.
pub fn backprop(
    params: &NetworkParams,
    x: ArrayView2<f64>,
    loss_grad: ArrayView1<f64>,
    mode: Mode,
    seed: u64,
) -> Result<ParamGrads> {
    let cache = forward_cached(params, x, mode, seed)?;
    backprop_cached(params, x, &cache, loss_grad)
}
