//! Experiment harness for Gaussian unitary tomography: configuration files,
//! parallel trial runs with per-trial reports, table export and the
//! verification suites.

pub mod config;
pub mod error;
pub mod instance;
pub mod run;
pub mod stats;
pub mod suites;
pub mod tables;
pub mod tolerances;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use run::{run_experiment, RunOptions, RunOutput, Summary, TrialReport};
pub use suites::{verify_suite, SuiteReport, SUITES};
pub use tables::{emit_tables, TableFormat};
