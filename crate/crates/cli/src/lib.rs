//! Experiment driver behind the `vqccs` binary: configuration, pipeline stages and
//! result files.

pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;

pub use config::{ExperimentConfig, SolverKind};
pub use error::{exit, CliError, CliResult};
