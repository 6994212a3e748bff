//! Right-censored survival data and the Cox negative log partial likelihood.
//!
//! Risk sets are never materialised. The dataset keeps a permutation that
//! orders samples by observed time (descending) together with the boundaries
//! of tied-time groups, so the loss and its gradient are single passes of
//! running sums along that order. Ties follow the Breslow convention: every
//! event in a tied group shares the denominator over `{j : Y_j >= t}`.

use std::ops::Range;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One observed triple `(Y, delta, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalSample {
    pub time: f64,
    /// 1 when the event was observed, 0 when censored.
    pub status: u8,
    pub covariates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalDataset {
    times: Vec<f64>,
    events: Vec<bool>,
    covariates: Array2<f64>,
    sort_index: Vec<usize>,
    // Ranges into `sort_index`, one per distinct time, in descending time order.
    tie_groups: Vec<Range<usize>>,
}

/// Build a dataset from individual samples. Sample order is preserved.
pub fn build_dataset(samples: &[SurvivalSample]) -> Result<SurvivalDataset> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::EmptyOrSingleton(n));
    }
    let p = samples[0].covariates.len();
    let mut x = Array2::zeros((n, p));
    let mut times = Vec::with_capacity(n);
    let mut events = Vec::with_capacity(n);
    for (i, s) in samples.iter().enumerate() {
        if s.covariates.len() != p {
            return Err(Error::DimensionMismatch { expected: p, actual: s.covariates.len() });
        }
        if s.status > 1 {
            return Err(Error::NonFiniteValue(format!("status of sample {i}")));
        }
        for (j, v) in s.covariates.iter().enumerate() {
            x[[i, j]] = *v;
        }
        times.push(s.time);
        events.push(s.status == 1);
    }
    SurvivalDataset::new(times, events, x)
}

impl SurvivalDataset {
    pub fn new(times: Vec<f64>, events: Vec<bool>, covariates: Array2<f64>) -> Result<Self> {
        let n = times.len();
        if n < 2 {
            return Err(Error::EmptyOrSingleton(n));
        }
        if events.len() != n {
            return Err(Error::LengthMismatch { expected: n, actual: events.len() });
        }
        if covariates.nrows() != n {
            return Err(Error::LengthMismatch { expected: n, actual: covariates.nrows() });
        }
        if let Some(i) = times.iter().position(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::NonFiniteValue(format!("time of sample {i}")));
        }
        if let Some(((i, j), _)) = covariates.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteValue(format!("covariate {j} of sample {i}")));
        }
        if !events.iter().any(|&e| e) {
            return Err(Error::NoEvents);
        }

        let mut sort_index: Vec<usize> = (0..n).collect();
        sort_index.sort_by(|&a, &b| {
            times[b].partial_cmp(&times[a]).expect("times are finite").then(events[b].cmp(&events[a])).then(a.cmp(&b))
        });

        let mut tie_groups = Vec::new();
        let mut start = 0;
        for pos in 1..=n {
            if pos == n || times[sort_index[pos]] != times[sort_index[start]] {
                tie_groups.push(start..pos);
                start = pos;
            }
        }

        Ok(Self { times, events, covariates, sort_index, tie_groups })
    }

    pub fn n(&self) -> usize {
        self.times.len()
    }

    pub fn p(&self) -> usize {
        self.covariates.ncols()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn events(&self) -> &[bool] {
        &self.events
    }

    pub fn covariates(&self) -> &Array2<f64> {
        &self.covariates
    }

    /// Sample indices ordered by time descending; at equal times events come
    /// first, then lower original index.
    pub fn sort_index(&self) -> &[usize] {
        &self.sort_index
    }

    pub fn event_count(&self) -> usize {
        self.events.iter().filter(|&&e| e).count()
    }

    pub fn censor_rate(&self) -> f64 {
        (self.n() - self.event_count()) as f64 / self.n() as f64
    }

    pub fn samples(&self) -> Vec<SurvivalSample> {
        (0..self.n())
            .map(|i| SurvivalSample {
                time: self.times[i],
                status: u8::from(self.events[i]),
                covariates: self.covariates.row(i).to_vec(),
            })
            .collect()
    }

    /// Same times and statuses with a replaced covariate matrix.
    pub fn with_covariates(&self, covariates: Array2<f64>) -> Result<Self> {
        if covariates.nrows() != self.n() {
            return Err(Error::LengthMismatch { expected: self.n(), actual: covariates.nrows() });
        }
        Self::new(self.times.clone(), self.events.clone(), covariates)
    }

    /// Dataset restricted to the given rows (in the given order).
    pub fn subset_rows(&self, rows: &[usize]) -> Result<Self> {
        let times = rows.iter().map(|&i| self.times[i]).collect();
        let events = rows.iter().map(|&i| self.events[i]).collect();
        let x = self.covariates.select(Axis(0), rows);
        Self::new(times, events, x)
    }

    /// Dataset restricted to the given 0-based covariate columns.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&c) = cols.iter().find(|&&c| c >= self.p()) {
            return Err(Error::DimensionMismatch { expected: self.p(), actual: c + 1 });
        }
        self.with_covariates(self.covariates.select(Axis(1), cols))
    }

    pub(crate) fn tie_groups(&self) -> &[Range<usize>] {
        &self.tie_groups
    }
}

/// Column means and sample standard deviations (`n - 1` denominator).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    /// Delta degrees of freedom of the sd denominator; always 1.
    pub ddof: usize,
}

impl Standardization {
    pub fn fit(x: &Array2<f64>) -> Result<Self> {
        let n = x.nrows();
        if n < 2 {
            return Err(Error::EmptyOrSingleton(n));
        }
        let mut means = Vec::with_capacity(x.ncols());
        let mut sds = Vec::with_capacity(x.ncols());
        for (j, col) in x.axis_iter(Axis(1)).enumerate() {
            let mean = col.sum() / n as f64;
            let ss: f64 = col.iter().map(|v| (v - mean).powi(2)).sum();
            let sd = (ss / (n - 1) as f64).sqrt();
            // Relative check so columns that differ only by rounding count as constant.
            if !(sd > 1e-12 * mean.abs().max(1.0)) {
                return Err(Error::ConstantColumn(j));
            }
            means.push(mean);
            sds.push(sd);
        }
        Ok(Self { means, sds, ddof: 1 })
    }

    pub fn apply(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        self.check(x)?;
        let mut out = x.clone();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            col.mapv_inplace(|v| (v - self.means[j]) / self.sds[j]);
        }
        Ok(out)
    }

    pub fn invert(&self, z: &Array2<f64>) -> Result<Array2<f64>> {
        self.check(z)?;
        let mut out = z.clone();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            col.mapv_inplace(|v| v * self.sds[j] + self.means[j]);
        }
        Ok(out)
    }

    fn check(&self, x: &Array2<f64>) -> Result<()> {
        if x.ncols() != self.means.len() {
            return Err(Error::DimensionMismatch { expected: self.means.len(), actual: x.ncols() });
        }
        Ok(())
    }
}

/// Standardize every covariate column to mean 0 and sample sd 1.
pub fn standardize(data: &SurvivalDataset) -> Result<(SurvivalDataset, Standardization)> {
    let st = Standardization::fit(data.covariates())?;
    let z = st.apply(data.covariates())?;
    Ok((data.with_covariates(z)?, st))
}

fn check_scores(scores: ArrayView1<f64>, data: &SurvivalDataset) -> Result<()> {
    if scores.len() != data.n() {
        return Err(Error::LengthMismatch { expected: data.n(), actual: scores.len() });
    }
    Ok(())
}

fn max_score(scores: ArrayView1<f64>) -> f64 {
    let m = scores.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if m.is_finite() {
        m
    } else {
        0.0
    }
}

/// `-log L = -sum_{i: delta_i = 1} [s_i - log sum_{j in R(Y_i)} exp(s_j)]`.
///
/// Not divided by `n`.
pub fn neg_log_partial_likelihood(scores: ArrayView1<f64>, data: &SurvivalDataset) -> Result<f64> {
    check_scores(scores, data)?;
    let shift = max_score(scores);
    let order = data.sort_index();
    let mut risk_sum = 0.0;
    let mut loss = 0.0;
    for group in data.tie_groups() {
        for &i in &order[group.clone()] {
            risk_sum += (scores[i] - shift).exp();
        }
        let log_denom = risk_sum.ln();
        for &i in &order[group.clone()] {
            if data.events[i] {
                loss -= scores[i] - shift - log_denom;
            }
        }
    }
    Ok(loss)
}

/// Gradient of [`neg_log_partial_likelihood`] with respect to the scores.
pub fn nlpl_gradient(scores: ArrayView1<f64>, data: &SurvivalDataset) -> Result<Array1<f64>> {
    loss_and_gradient(scores, data).map(|(_, g)| g)
}

/// Loss and score gradient from one pair of sweeps.
pub fn loss_and_gradient(scores: ArrayView1<f64>, data: &SurvivalDataset) -> Result<(f64, Array1<f64>)> {
    check_scores(scores, data)?;
    let shift = max_score(scores);
    let order = data.sort_index();
    let groups = data.tie_groups();
    let weights: Vec<f64> = scores.iter().map(|s| (s - shift).exp()).collect();

    let mut risk_sum = 0.0;
    let mut loss = 0.0;
    // (event count, denominator) per tie group
    let mut group_terms = Vec::with_capacity(groups.len());
    for group in groups {
        let mut group_events = 0usize;
        for &i in &order[group.clone()] {
            risk_sum += weights[i];
        }
        let log_denom = risk_sum.ln();
        for &i in &order[group.clone()] {
            if data.events[i] {
                group_events += 1;
                loss -= scores[i] - shift - log_denom;
            }
        }
        group_terms.push((group_events, risk_sum));
    }

    let mut grad = Array1::zeros(data.n());
    let mut hazard_sum = 0.0;
    for (group, &(d, denom)) in groups.iter().zip(&group_terms).rev() {
        if d > 0 {
            hazard_sum += d as f64 / denom;
        }
        for &i in &order[group.clone()] {
            grad[i] = weights[i] * hazard_sum - if data.events[i] { 1.0 } else { 0.0 };
        }
    }
    Ok((loss, grad))
}
