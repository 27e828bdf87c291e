//! Command-line frontend for the distributed equilibrium-seeking library:
//! config parsing, experiment orchestration, trace output, and the two
//! packaged reproduction experiments.

pub mod config;
pub mod csv_io;
pub mod error;
pub mod experiment;

pub use config::ExperimentConfig;
pub use error::CliError;
pub use experiment::{
    check_params, reproduce_example1, reproduce_example2, run_experiment, summary_text,
    summary_value, Overrides, Report,
};
