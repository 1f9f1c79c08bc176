//! Backward-induction solution of the max-min selection problem.
//!
//! The terminal value of a state is the worst-case utility
//! `J_T(x) = min_{p ∈ P} U(R(x, p))`; earlier values satisfy
//!
//! ```text
//! J_t(x) = max_i Σ_k C(x_i, k) (1-θ_i)^k θ_i^{x_i-k} · J_{t+1}(x with x_i ← k)
//! ```
//!
//! i.e. testing module `i` thins its defect count binomially and leaves the
//! other modules untouched. The worst case enters only through the terminal
//! stage; no re-minimization happens at interior stages.
//!
//! For the exponential utility the recursion runs on the positive decay
//! factor `K = exp(-R/γ)` and minimizes, mapping back via `J = 1 - K`. The
//! two forms are algebraically identical, but the direct form collapses to
//! 1.0 in double precision for small risk tolerances and erases the policy
//! signal.
//!
//! Ties in the argmax resolve to the lowest module index, which keeps tables
//! reproducible.

use alloc::string::String;
use alloc::vec::Vec;
use core::time::Duration;

use crate::error::{Error, Result};
use crate::grid::StateGrid;
use crate::math;
use crate::model::{ModelSpec, OperationalProfile, Utility, DEFAULT_STATE_CAP};
use crate::uncertainty::{worst_case, UncertaintySet};

/// Which value slices a solve keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Retention {
    /// Every period `t = 0..=T`; required by the diagnostics scans.
    #[default]
    Full,
    /// Only `t = 0` and `t = T`, for memory-capped runs. The policy is always
    /// kept in full.
    FirstAndLast,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub state_cap: u64,
    pub retention: Retention,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            state_cap: DEFAULT_STATE_CAP,
            retention: Retention::Full,
        }
    }
}

/// Value function samples over the state grid for the retained periods.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    grid: StateGrid,
    horizon: u32,
    periods: Vec<u32>,
    slices: Vec<Vec<f64>>,
}

impl ValueTable {
    /// Build a table holding one slice per period `0..slices.len()`.
    pub fn from_slices(initial_defects: &[u32], slices: Vec<Vec<f64>>) -> Result<Self> {
        let grid = StateGrid::new(initial_defects)?;
        if slices.is_empty() {
            return Err(Error::validation("values", "at least one slice is required"));
        }
        for (t, slice) in slices.iter().enumerate() {
            if slice.len() != grid.len() {
                return Err(Error::validation(
                    "values",
                    alloc::format!(
                        "slice {} has {} entries, grid has {}",
                        t,
                        slice.len(),
                        grid.len()
                    ),
                ));
            }
        }
        let horizon = (slices.len() - 1) as u32;
        Ok(Self {
            grid,
            horizon,
            periods: (0..=horizon).collect(),
            slices,
        })
    }

    pub fn grid(&self) -> &StateGrid {
        &self.grid
    }

    /// Horizon `T` of the solve that produced the table.
    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    /// Periods with a retained slice, ascending.
    pub fn periods(&self) -> &[u32] {
        &self.periods
    }

    pub fn is_full(&self) -> bool {
        self.periods.len() as u32 == self.horizon + 1
    }

    /// Value slice for period `t`, if retained.
    pub fn slice(&self, t: u32) -> Option<&[f64]> {
        let pos = self.periods.iter().position(|&p| p == t)?;
        Some(&self.slices[pos])
    }

    /// Value at `(t, state)`, if the period is retained.
    pub fn value(&self, t: u32, state: &[u32]) -> Option<f64> {
        Some(self.slice(t)?[self.grid.index_of(state)])
    }
}

/// The module chosen at each `(state, period)` with `0 ≤ t < T`.
///
/// Choices are 0-based module indices; serialization uses the 1-based
/// convention.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTable {
    grid: StateGrid,
    horizon: u32,
    choices: Vec<Vec<u16>>,
}

impl PolicyTable {
    /// Build a policy from per-period choice grids (`choices[t][state_index]`).
    pub fn from_choices(initial_defects: &[u32], choices: Vec<Vec<u16>>) -> Result<Self> {
        let grid = StateGrid::new(initial_defects)?;
        if choices.is_empty() {
            return Err(Error::validation("policy", "at least one period is required"));
        }
        let modules = initial_defects.len();
        for (t, slice) in choices.iter().enumerate() {
            if slice.len() != grid.len() {
                return Err(Error::validation(
                    "policy",
                    alloc::format!(
                        "period {} has {} entries, grid has {}",
                        t,
                        slice.len(),
                        grid.len()
                    ),
                ));
            }
            if slice.iter().any(|&c| c as usize >= modules) {
                return Err(Error::validation(
                    "policy",
                    alloc::format!("period {t} references a module out of range"),
                ));
            }
        }
        let horizon = choices.len() as u32;
        Ok(Self {
            grid,
            horizon,
            choices,
        })
    }

    pub fn grid(&self) -> &StateGrid {
        &self.grid
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    /// 0-based module chosen at `(t, flat state index)`.
    pub fn choice_by_index(&self, t: u32, index: usize) -> usize {
        self.choices[t as usize][index] as usize
    }

    /// 0-based module chosen at `(t, state)`.
    pub fn choice(&self, t: u32, state: &[u32]) -> usize {
        self.choice_by_index(t, self.grid.index_of(state))
    }

    /// Raw choice grid for period `t`.
    pub fn period_choices(&self, t: u32) -> &[u16] {
        &self.choices[t as usize]
    }
}

/// Outcome of a solve: start value, tables, and bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// `J_0(N)` — the optimal worst-case expected utility from the start.
    pub value_at_start: f64,
    pub values: ValueTable,
    pub policy: PolicyTable,
    /// State evaluations performed: grid size × (T + 1) slices.
    pub states_evaluated: u64,
    pub wall_time: Duration,
    pub warnings: Vec<String>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Maximize,
    Minimize,
}

impl Direction {
    #[inline]
    fn better(self, candidate: f64, incumbent: f64) -> bool {
        match self {
            Direction::Maximize => candidate > incumbent,
            Direction::Minimize => candidate < incumbent,
        }
    }
}

/// How raw engine values map to reported values.
#[derive(Clone, Copy, PartialEq, Eq)]
enum ValueMap {
    Direct,
    /// Reported value is `1 - raw` (exponential-utility decay factor).
    OneMinus,
}

impl ValueMap {
    #[inline]
    fn apply(self, raw: f64) -> f64 {
        match self {
            ValueMap::Direct => raw,
            ValueMap::OneMinus => 1.0 - raw,
        }
    }

    fn apply_slice(self, raw: &[f64]) -> Vec<f64> {
        raw.iter().map(|&v| self.apply(v)).collect()
    }
}

/// Survival kernels for every axis and defect count, plus the grid.
struct Engine {
    grid: StateGrid,
    /// `kernels[axis][n][k]` = P(k of n defects survive one test).
    kernels: Vec<Vec<Vec<f64>>>,
}

impl Engine {
    fn new(model: &ModelSpec) -> Result<Self> {
        let grid = StateGrid::from_model(model)?;
        let mut kernels = Vec::with_capacity(model.module_count());
        for (&n, &theta) in model.initial_defects.iter().zip(&model.detection_prob) {
            let q = 1.0 - theta;
            let mut per_count = Vec::with_capacity(n as usize + 1);
            for trials in 0..=n {
                per_count.push(crate::model::BinomialKernel::new(trials, q)?.pmf().to_vec());
            }
            kernels.push(per_count);
        }
        Ok(Self { grid, kernels })
    }

    /// One-module expectation: `out[x] = Σ_k pmf_{x_i}[k] · next[x with x_i ← k]`.
    fn marginalize(&self, next: &[f64], axis: usize, out: &mut [f64]) {
        let stride = self.grid.stride(axis);
        let dim = self.grid.dims()[axis] as usize;
        let kernels = &self.kernels[axis];
        for (idx, slot) in out.iter_mut().enumerate() {
            let xi = (idx / stride) % dim;
            let base = idx - xi * stride;
            let pmf = &kernels[xi];
            let mut acc = 0.0;
            for (k, &w) in pmf.iter().enumerate() {
                acc += w * next[base + k * stride];
            }
            *slot = acc;
        }
    }

    /// Expectation under a fixed per-state module choice.
    fn marginalize_policy(&self, next: &[f64], choices: &[u16], out: &mut [f64]) {
        for (idx, slot) in out.iter_mut().enumerate() {
            let axis = choices[idx] as usize;
            let stride = self.grid.stride(axis);
            let dim = self.grid.dims()[axis] as usize;
            let xi = (idx / stride) % dim;
            let base = idx - xi * stride;
            let pmf = &self.kernels[axis][xi];
            let mut acc = 0.0;
            for (k, &w) in pmf.iter().enumerate() {
                acc += w * next[base + k * stride];
            }
            *slot = acc;
        }
    }
}

struct BackwardOutcome {
    periods: Vec<u32>,
    slices: Vec<Vec<f64>>,
    choices: Vec<Vec<u16>>,
}

/// Run the optimizing recursion from a terminal slice down to period 0.
fn backward_optimize(
    engine: &Engine,
    model: &ModelSpec,
    terminal: Vec<f64>,
    direction: Direction,
    map: ValueMap,
    retention: Retention,
) -> BackwardOutcome {
    let horizon = model.periods;
    let modules = model.module_count();
    let states = engine.grid.len();

    let mut retained: Vec<(u32, Vec<f64>)> = Vec::new();
    retained.push((horizon, map.apply_slice(&terminal)));

    let mut choices: Vec<Vec<u16>> = alloc::vec![Vec::new(); horizon as usize];
    let mut next = terminal;
    let mut best = alloc::vec![0.0f64; states];
    let mut scratch = alloc::vec![0.0f64; states];
    let mut period_choice = alloc::vec![0u16; states];

    for t in (0..horizon).rev() {
        for module in 0..modules {
            engine.marginalize(&next, module, &mut scratch);
            if module == 0 {
                best.copy_from_slice(&scratch);
                period_choice.fill(0);
            } else {
                for idx in 0..states {
                    if direction.better(scratch[idx], best[idx]) {
                        best[idx] = scratch[idx];
                        period_choice[idx] = module as u16;
                    }
                }
            }
        }
        core::mem::swap(&mut next, &mut best);
        choices[t as usize] = period_choice.clone();
        if retention == Retention::Full || t == 0 {
            retained.push((t, map.apply_slice(&next)));
        }
    }

    retained.sort_by_key(|(t, _)| *t);
    let (periods, slices) = retained.into_iter().unzip();
    BackwardOutcome {
        periods,
        slices,
        choices,
    }
}

fn start_index(grid: &StateGrid, model: &ModelSpec) -> usize {
    grid.index_of(&model.initial_defects)
}

/// Solve the max-min selection problem with default options.
pub fn solve(model: &ModelSpec, utility: &Utility, set: &UncertaintySet) -> Result<SolveReport> {
    solve_with_options(model, utility, set, &SolveOptions::default())
}

/// Solve the max-min selection problem.
///
/// The terminal stage applies [`worst_case`] per state and composes the
/// utility; interior stages take the best one-module expectation.
pub fn solve_with_options(
    model: &ModelSpec,
    utility: &Utility,
    set: &UncertaintySet,
    options: &SolveOptions,
) -> Result<SolveReport> {
    #[cfg(feature = "std")]
    let started = std::time::Instant::now();

    model.validate_with_cap(options.state_cap)?;
    utility.validate()?;
    set.validate()?;
    if set.dimension() != model.module_count() {
        return Err(Error::DimensionMismatch {
            expected: model.module_count(),
            actual: set.dimension(),
        });
    }

    let mut warnings = Vec::new();
    if *utility == Utility::Quadratic {
        warnings.push(String::from(
            "quadratic utility is decreasing above r = 1/2; it is intended for \
             counterexample studies, not as a solve objective",
        ));
    }

    let engine = Engine::new(model)?;
    let states = engine.grid.len();

    let (direction, map) = match utility {
        Utility::Exponential { .. } => (Direction::Minimize, ValueMap::OneMinus),
        _ => (Direction::Maximize, ValueMap::Direct),
    };

    let mut terminal = alloc::vec![0.0f64; states];
    let mut state = alloc::vec![0u32; engine.grid.axes()];
    for (idx, slot) in terminal.iter_mut().enumerate() {
        engine.grid.decode_into(idx, &mut state);
        let wc = worst_case(&state, &model.detection_prob, set)?;
        *slot = match utility {
            Utility::Exponential { risk_tolerance } => math::exp(-wc.value / risk_tolerance),
            _ => utility.eval(wc.value)?,
        };
    }

    let outcome = backward_optimize(&engine, model, terminal, direction, map, options.retention);
    let wall_time = {
        #[cfg(feature = "std")]
        {
            started.elapsed()
        }
        #[cfg(not(feature = "std"))]
        {
            Duration::ZERO
        }
    };
    Ok(finish_report(model, engine, outcome, warnings, wall_time))
}

/// Baseline objective: minimize the expected residual defect count
/// `E[Σ_i x_i(T)]` with the same transition kernel and machinery.
pub fn solve_min_defects(model: &ModelSpec) -> Result<SolveReport> {
    solve_min_defects_with_options(model, &SolveOptions::default())
}

pub fn solve_min_defects_with_options(
    model: &ModelSpec,
    options: &SolveOptions,
) -> Result<SolveReport> {
    #[cfg(feature = "std")]
    let started = std::time::Instant::now();

    model.validate_with_cap(options.state_cap)?;
    let engine = Engine::new(model)?;
    let states = engine.grid.len();
    let mut terminal = alloc::vec![0.0f64; states];
    for (idx, slot) in terminal.iter_mut().enumerate() {
        let mut sum = 0u64;
        for axis in 0..engine.grid.axes() {
            sum += engine.grid.coordinate(idx, axis) as u64;
        }
        *slot = sum as f64;
    }
    let outcome = backward_optimize(
        &engine,
        model,
        terminal,
        Direction::Minimize,
        ValueMap::Direct,
        options.retention,
    );
    let wall_time = {
        #[cfg(feature = "std")]
        {
            started.elapsed()
        }
        #[cfg(not(feature = "std"))]
        {
            Duration::ZERO
        }
    };
    Ok(finish_report(model, engine, outcome, Vec::new(), wall_time))
}

fn finish_report(
    model: &ModelSpec,
    engine: Engine,
    outcome: BackwardOutcome,
    warnings: Vec<String>,
    wall_time: Duration,
) -> SolveReport {
    let states = engine.grid.len() as u64;
    let start = start_index(&engine.grid, model);
    let horizon = model.periods;
    let value_at_start = outcome.slices[0][start];

    let values = ValueTable {
        grid: engine.grid.clone(),
        horizon,
        periods: outcome.periods,
        slices: outcome.slices,
    };
    let policy = PolicyTable {
        grid: engine.grid,
        horizon,
        choices: outcome.choices,
    };
    SolveReport {
        value_at_start,
        values,
        policy,
        states_evaluated: states * (u64::from(horizon) + 1),
        wall_time,
        warnings,
    }
}

/// One Bellman expectation: the value of testing module `module` once from
/// every state, given next-period values over the full grid. Only the tested
/// coordinate is marginalized.
pub fn bellman_step(next_values: &[f64], model: &ModelSpec, module: usize) -> Result<Vec<f64>> {
    model.validate()?;
    if module >= model.module_count() {
        return Err(Error::validation(
            "i",
            alloc::format!(
                "module index {module} out of range for {} modules",
                model.module_count()
            ),
        ));
    }
    let engine = Engine::new(model)?;
    if next_values.len() != engine.grid.len() {
        return Err(Error::DimensionMismatch {
            expected: engine.grid.len(),
            actual: next_values.len(),
        });
    }
    let mut out = alloc::vec![0.0f64; next_values.len()];
    engine.marginalize(next_values, module, &mut out);
    Ok(out)
}

/// Closed-form optimal choice one period before release, valid for the
/// identity utility with a known profile: pick the module maximizing
/// `p_i ((1 - θ_i + θ_i²)^{x_i} - (1 - θ_i)^{x_i})`, ties to the lowest
/// index.
pub fn closed_form_t_minus1_choice(
    defect_counts: &[u32],
    model: &ModelSpec,
    utility: &Utility,
    set: &UncertaintySet,
) -> Result<usize> {
    let profile = match (utility, set) {
        (Utility::Identity, UncertaintySet::Singleton(p)) => p,
        _ => {
            return Err(Error::Unsupported(String::from(
                "the closed form requires the identity utility and a singleton profile",
            )))
        }
    };
    if defect_counts.len() != model.module_count() || profile.len() != model.module_count() {
        return Err(Error::DimensionMismatch {
            expected: model.module_count(),
            actual: defect_counts.len().min(profile.len()),
        });
    }
    let mut best = 0usize;
    let mut best_score = f64::NEG_INFINITY;
    for (i, ((&x, &theta), &p)) in defect_counts
        .iter()
        .zip(&model.detection_prob)
        .zip(profile.probabilities())
        .enumerate()
    {
        let score = p * (math::powi(1.0 - theta + theta * theta, x) - math::powi(1.0 - theta, x));
        if score > best_score {
            best_score = score;
            best = i;
        }
    }
    Ok(best)
}

/// The one-period-before-release score the closed form maximizes; exposed so
/// diagnostics can compare near-ties against the solver's table.
pub fn t_minus1_score(x: u32, theta: f64, p: f64) -> f64 {
    p * (math::powi(1.0 - theta + theta * theta, x) - math::powi(1.0 - theta, x))
}

/// Exact expected utility of following `policy` when the true profile is
/// `true_profile`: the optimizing recursion with the max replaced by the
/// policy's recorded choice and terminal value `U(R(x, true_profile))`.
pub fn evaluate_policy(
    policy: &PolicyTable,
    model: &ModelSpec,
    utility: &Utility,
    true_profile: &OperationalProfile,
) -> Result<f64> {
    model.validate()?;
    utility.validate()?;
    if true_profile.len() != model.module_count() {
        return Err(Error::DimensionMismatch {
            expected: model.module_count(),
            actual: true_profile.len(),
        });
    }
    let engine = Engine::new(model)?;
    if policy.grid() != &engine.grid {
        return Err(Error::validation(
            "policy",
            "policy grid does not match the model's state grid",
        ));
    }
    if policy.horizon() != model.periods {
        return Err(Error::validation(
            "policy",
            alloc::format!(
                "policy horizon {} does not match model horizon {}",
                policy.horizon(),
                model.periods
            ),
        ));
    }

    let states = engine.grid.len();
    let map = match utility {
        Utility::Exponential { .. } => ValueMap::OneMinus,
        _ => ValueMap::Direct,
    };
    let mut next = alloc::vec![0.0f64; states];
    let mut state = alloc::vec![0u32; engine.grid.axes()];
    for (idx, slot) in next.iter_mut().enumerate() {
        engine.grid.decode_into(idx, &mut state);
        let r = crate::model::reliability_unchecked(
            &state,
            true_profile.probabilities(),
            &model.detection_prob,
        );
        *slot = match utility {
            Utility::Exponential { risk_tolerance } => math::exp(-r / risk_tolerance),
            _ => utility.eval(r)?,
        };
    }
    let mut out = alloc::vec![0.0f64; states];
    for t in (0..model.periods).rev() {
        engine.marginalize_policy(&next, policy.period_choices(t), &mut out);
        core::mem::swap(&mut next, &mut out);
    }
    Ok(map.apply(next[start_index(&engine.grid, model)]))
}

/// Relative shortfall `(optimal - achieved) / optimal` of a policy's value
/// versus the optimum.
pub fn gap(optimal_value: f64, achieved_value: f64) -> Result<f64> {
    if optimal_value.is_nan() || optimal_value <= 0.0 {
        return Err(Error::Domain(alloc::format!(
            "gap requires a positive optimal value, got {optimal_value}"
        )));
    }
    Ok((optimal_value - achieved_value) / optimal_value)
}
