use thiserror::Error;

/// Errors raised by the survival, network, training and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("a survival dataset needs at least two samples, got {0}")]
    EmptyOrSingleton(usize),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("no sample has an observed event; the partial likelihood is degenerate")]
    NoEvents,
    #[error("non-finite or invalid value in {0}")]
    NonFiniteValue(String),
    #[error("covariate column {0} has zero standard deviation")]
    ConstantColumn(usize),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("loss became non-finite at {0}; the learning rate is probably too large")]
    NonFiniteLoss(String),
    #[error("lambda path did not reach an empty model within {0} steps")]
    NoTermination(usize),
    #[error("k = {k} is outside 1..={p}")]
    KOutOfRange { k: usize, p: usize },
    #[error("observed information matrix is singular")]
    SingularHessian,
    #[error("rho = {0} must lie in [0, 1)")]
    InvalidRho(f64),
    #[error("censoring bound c = {0} must be positive and finite")]
    InvalidC(f64),
    #[error("the set of true features is empty")]
    EmptyTruth,
    #[error("replication records disagree on the set of true features")]
    InconsistentTruth,
    #[error("k = {k} is smaller than the number of true features {truth}")]
    KTooSmall { k: usize, truth: usize },
    #[error("feature {feature} is outside 1..={p}")]
    FeatureOutOfRange { feature: usize, p: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
