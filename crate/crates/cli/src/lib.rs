//! Experiment runner for random non-Hermitian Jacobi matrices.
//!
//! Every pipeline of `jacobi-spectra-core` is exposed as a subcommand that
//! reads a TOML [`config::ExperimentConfig`], runs replicas and grid nodes
//! in parallel and writes self-describing NDJSON or CSV files atomically,
//! together with a `manifest.ndjson` row per run. Results do not depend on
//! the number of threads. File layouts are described in `docs/formats.md`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod grid_io;
pub mod output;
pub mod parallel;

pub use commands::{execute, run, RunOutput, RunReport, Subcommand};
pub use config::ExperimentConfig;
pub use error::CliError;
