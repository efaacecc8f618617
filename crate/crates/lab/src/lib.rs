//! Host-side companion to `qce-core`: multi-threaded SER sweeps, the
//! experiment config file, CSV output and the `qce-sim` command.

pub mod config;
pub mod error;
pub mod experiment;
pub mod runner;
pub mod table;

pub use config::{ExperimentSpec, Overrides};
pub use error::{LabError, Result};
pub use experiment::{run_experiment, ExperimentOutput};
pub use runner::run_ser_parallel;
