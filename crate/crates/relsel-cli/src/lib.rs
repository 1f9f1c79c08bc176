//! Experiment runner for reliability-driven test-module selection:
//! JSON experiment configs in, CSV artifacts out.
//!
//! The heavy lifting (models, worst cases, the backward-induction solver,
//! the simulator, diagnostics) lives in `relsel-core`; this crate adds
//! configuration ingestion, number formatting, CSV emission, and the
//! `relsel` binary with its study-reproduction commands.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;

pub use commands::{
    cmd_evaluate, cmd_repro, cmd_simulate, cmd_solve, cmd_sweep_gamma, cmd_sweep_profile,
    objective_gap_config, risk_sweep_config, robust_gap_config, EvalObjective, ReproName,
    ReproOptions, ReproReport, SweepMode,
};
pub use config::ExperimentConfig;
pub use error::CliError;
