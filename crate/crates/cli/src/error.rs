use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("schema error in {path}: {message}")]
    Schema { path: PathBuf, message: String },
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] coxnet::Error),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn schema(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Schema { path: path.into(), message: message.into() }
    }

    /// Process exit code: 2 configuration, 3 data, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        use coxnet::Error as E;
        match self {
            CliError::InvalidConfig(_) => 2,
            CliError::Schema { .. } | CliError::Io { .. } => 3,
            CliError::Numerical(_) => 4,
            CliError::Core(e) => match e {
                E::InvalidConfig(_)
                | E::InvalidRho(_)
                | E::InvalidC(_)
                | E::KOutOfRange { .. }
                | E::KTooSmall { .. }
                | E::FeatureOutOfRange { .. } => 2,
                E::NonFiniteLoss(_) | E::NoTermination(_) | E::SingularHessian => 4,
                E::EmptyOrSingleton(_)
                | E::DimensionMismatch { .. }
                | E::NoEvents
                | E::NonFiniteValue(_)
                | E::ConstantColumn(_)
                | E::LengthMismatch { .. }
                | E::EmptyTruth
                | E::InconsistentTruth => 3,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
