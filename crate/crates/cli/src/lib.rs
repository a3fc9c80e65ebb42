//! Experiment runner for the online inventory policies: JSON configs,
//! replicated runs, learning-rate sweeps and regret growth fits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod growth;
pub mod plot;
pub mod runner;
pub mod sweep;

pub use config::{ExperimentConfig, PolicySpec, Resolved, SettingConfig};
pub use growth::{growth_fit, GrowthOutcome};
pub use runner::{run_experiment, ExperimentOutcome, Replication};
pub use sweep::{log_grid, sweep_gamma, SweepOutcome, SweepRow};
