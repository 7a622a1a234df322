//! Experiment runner for the heat-content asymptotics: configuration,
//! ratio tables, log-log fits and CSV/JSON output.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::LabError;
pub use experiments::{run_experiment, run_with_workers, ExperimentResult, Row};
pub use shc_core::asymptotics::{fit_loglog, LogLogFit};
