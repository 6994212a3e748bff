//! Command-line front end for `coxnet`.
//!
//! Four commands share one TOML configuration file (`--config`), with one
//! table per command; flags override individual keys:
//!
//! - `simulate`: writes a dataset CSV and a scenario JSON sidecar.
//! - `fit`: standardizes, runs the penalty path (or the linear lasso) and
//!   writes the ranking.
//! - `benchmark`: repeats simulation and selection over a scenario grid and
//!   writes a long-format CSV table with a JSON sidecar.
//! - `rank`: network ranking followed by a classical Cox refit on the top k.
//!
//! JSON outputs carry a provenance block with the SHA-256 of the resolved
//! configuration and the seed. Identical inputs give byte-identical files.

pub mod args;
pub mod commands;
pub mod config;
pub mod data;
pub mod error;

pub use args::{run, Cli};
pub use config::RunConfig;
pub use error::{CliError, Result};
