//! Dynamic test-module selection that maximizes the delivered reliability of
//! released software.
//!
//! A system under test consists of `m` modules, each holding a known number of
//! defects that each trigger a failure with a per-module probability when the
//! module is exercised. The tester runs a fixed number of testing periods,
//! picking one module per period; detected defects are repaired immediately.
//! After release, users exercise module `i` with probability `p_i` (the
//! operational profile), so the probability of a failure-free session is
//! `Σ p_i (1 - θ_i)^{x_i}` given residual defect counts `x`.
//!
//! This crate computes the selection policy that maximizes the worst-case
//! expected utility of that delivered reliability by exact backward induction
//! over the defect-count grid:
//!
//! * [`model`] — process model, operational profiles, utilities, and the
//!   binomial defect-survival kernel;
//! * [`uncertainty`] — operational-profile uncertainty sets and the inner
//!   worst-case minimization;
//! * [`solver`] — the backward-induction solver, fixed-policy evaluation, and
//!   the min-expected-defects baseline objective;
//! * [`simulate`] — seeded, reproducible Monte Carlo simulation of the testing
//!   process under a policy;
//! * [`diagnostics`] — independent brute-force oracles and structural property
//!   scans (monotonicity, convexity, policy non-monotonicity witnesses).
//!
//! The crate is `no_std`-compatible (`alloc` required); disable the default
//! `std` feature and enable `libm` for embedded use.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod diagnostics;
pub mod error;
pub mod grid;
mod math;
pub mod model;
pub mod simulate;
pub mod solver;
pub mod uncertainty;

pub use error::{Error, Result, Violation};
pub use grid::StateGrid;
pub use model::{
    binomial_kernel, reliability, utility_eval, validate_model, BinomialKernel, DefectState,
    ModelSpec, OperationalProfile, Utility, ValidatedModel, DEFAULT_STATE_CAP,
};
pub use simulate::{
    simulate_many, simulate_many_with_workers, simulate_once, SimulationConfig, SimulationStats,
};
pub use solver::{
    bellman_step, closed_form_t_minus1_choice, evaluate_policy, gap, solve, solve_min_defects,
    solve_with_options, PolicyTable, Retention, SolveOptions, SolveReport, ValueTable,
};
pub use uncertainty::{
    contains, interval_m2_reduce, worst_case, Attainment, UncertaintySet, WorstCaseResult,
};
