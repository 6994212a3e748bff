//! Variable selection for right-censored survival data with residual
//! networks trained under a hierarchical sparsity constraint.
//!
//! The building blocks:
//!
//! - [`survival`]: data model and the Cox negative log partial likelihood.
//! - [`resnet`]: the residual network `theta^T x + g(x)` with backprop.
//! - [`hier_prox`]: the proximal operator coupling `theta_i` with column `i` of `W_0`.
//! - [`path`]: dense pretraining followed by the geometric penalty path.
//! - [`baselines`]: classical and l1-penalised linear Cox.
//! - [`simgen`]: simulation designs.
//! - [`metrics`]: MinSize / Prob(k, .) and the replication harness.

pub mod baselines;
pub mod error;
pub mod hier_prox;
pub mod metrics;
pub mod path;
pub mod resnet;
pub mod simgen;
pub mod survival;

pub use baselines::{fit_cox_classical, fit_cox_lasso_path, rank_by_pvalue, CoxFit, LassoCoxPath};
pub use error::{Error, Result};
pub use hier_prox::{hier_prox_batch, hier_prox_single, ProxInput, ProxOutput};
pub use metrics::{run_benchmark, BenchmarkTable, Method, ReplicationRecord};
pub use path::{
    rank_features, select_top_k, train_dense, train_path, LambdaInit, LambdaSchedule, PathConfig, PathPoint, PathResult,
};
pub use resnet::{Architecture, Mode, NetworkParams, ParamGrads};
pub use simgen::{generate, GeneratedData, Model, SimScenario};
pub use survival::{build_dataset, standardize, Standardization, SurvivalDataset, SurvivalSample};
