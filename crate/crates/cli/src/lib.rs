//! Command implementations behind the `fuzzmark` binary.

pub mod bench;
pub mod commands;
pub mod config;
pub mod error;

pub use bench::{default_attacks, run_bench, trial_seed, BenchOptions, BenchReport, BenchRow, Trial};
pub use config::RunConfig;
pub use error::{CliError, Result};
