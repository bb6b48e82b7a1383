//! Experiment harness for the `epoch-gda` solvers.
//!
//! An experiment is a TOML document ([`ExperimentConfig`]) naming a testbed,
//! a solver and a list of seeds. [`run_experiment`] writes one CSV trace per
//! run and a JSON [`RunSummary`]; [`sweep`] repeats an experiment over the
//! values of one numeric field.

pub mod config;
pub mod experiment;
pub mod output;
pub mod sweep;

pub use config::{ConfigError, ExperimentConfig, ManualSchedule, Mode, SolverSpec};
pub use experiment::{fit_points, median, rate_fit, run_experiment, SUMMARY_FILE};
pub use output::{emit_csv, emit_summary, trace_to_csv, BudgetPoint, GroupSummary, RunRecord, RunSummary, CSV_HEADER};
pub use sweep::{sweep, with_axis, SWEEP_FILE};
