//! File formats, presets and command implementations behind the
//! `spectral-control` binary.
//!
//! A run is: load an [`ExperimentConfig`] (JSON file or preset), resolve it
//! into an [`Experiment`], then execute a [`Command`] with a [`Runner`]. Each
//! command yields an [`Outcome`] holding a JSON report and CSV tables.

pub mod commands;
pub mod config;
pub mod error;
pub mod presets;
pub mod table;

pub use commands::{threads_from_env, Command, Outcome, Runner, THREADS_ENV};
pub use config::{Experiment, ExperimentConfig, FamilyChoice, StateSpec};
pub use error::CliError;
pub use presets::{preset, PRESET_NAMES};

/// Resolves `config` and runs `command` on a pool of `threads` workers.
pub fn run_config(
    command: Command,
    config: &ExperimentConfig,
    threads: Option<usize>,
) -> Result<Outcome, CliError> {
    let experiment = Experiment::resolve(config)?;
    Runner::new(threads)?.run(command, &experiment)
}
