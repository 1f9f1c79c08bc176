//! Independent oracles and structural property scans.
//!
//! The brute-force evaluator re-derives expected utilities by exhaustive
//! enumeration of every binomial outcome at every period, with its own naive
//! power and binomial-probability arithmetic. It shares nothing with the
//! solver's kernel tables or grid marginalization, so agreement between the
//! two is meaningful evidence.
//!
//! The scans verify, on concrete value tables, that values do not increase
//! in any defect count, do not increase as testing time runs out, and are
//! discretely convex in the risk-neutral known-profile regime — and that the
//! known counterexamples outside that regime are reproduced.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{DefectState, ModelSpec, OperationalProfile, Utility};
use crate::solver::{solve, PolicyTable, ValueTable};
use crate::uncertainty::UncertaintySet;

/// Tolerance for table scans; values come from one arithmetic pipeline, so
/// slack is minimal.
pub const SCAN_TOLERANCE: f64 = 1e-12;

/// Enumeration budget for the brute-force trajectory tree, counted in edges.
pub const MAX_TREE_BRANCHES: u64 = 1_000_000;

/// Outcome of a property scan.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub property_name: String,
    pub holds: bool,
    /// Violating states in lexicographic `(t, x)` order; empty when the
    /// property holds.
    pub witnesses: Vec<DefectState>,
    pub states_checked: u64,
}

impl PropertyReport {
    fn new(name: &str, witnesses: Vec<DefectState>, states_checked: u64) -> Self {
        Self {
            property_name: String::from(name),
            holds: witnesses.is_empty(),
            witnesses,
            states_checked,
        }
    }
}

/// Follow a fixed policy, or optimize over choices on the fly.
pub enum PolicyMode<'a> {
    Fixed(&'a PolicyTable),
    Optimal,
}

/// Exact expected utility by exhaustive trajectory enumeration.
///
/// The terminal score of a leaf is `U(min over the set's members of R(x, p))`
/// — the same pointwise worst case the solver's terminal stage applies.
/// Only singleton and finite sets are supported. In `Optimal` mode the
/// recursion takes the best module at every node, which equals the optimum
/// over all deterministic Markov policies.
pub fn brute_force_value(
    model: &ModelSpec,
    utility: &Utility,
    set: &UncertaintySet,
    mode: PolicyMode<'_>,
) -> Result<f64> {
    model.validate()?;
    utility.validate()?;
    set.validate()?;
    let members = finite_members(set)?;
    if let PolicyMode::Fixed(policy) = &mode {
        if policy.horizon() != model.periods || policy.grid().axes() != model.module_count() {
            return Err(Error::validation(
                "policy",
                "policy does not cover the model's grid and horizon",
            ));
        }
    }
    let mut budget = MAX_TREE_BRANCHES;
    let mut state = model.initial_defects.clone();
    match mode {
        PolicyMode::Fixed(policy) => {
            let choice = |t: u32, x: &[u32]| policy.choice(t, x);
            tree_value(model, utility, &members, &choice, &mut state, 0, &mut budget)
        }
        PolicyMode::Optimal => tree_optimal(model, utility, &members, &mut state, 0, &mut budget),
    }
}

/// Result of enumerating every deterministic Markov policy.
#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveSearch {
    pub best_value: f64,
    pub policies_enumerated: u64,
}

/// Enumerate every deterministic Markov policy on the union-reachable tree
/// and return the best fixed-policy value. Errors when more than
/// `max_policies` assignments exist.
pub fn exhaustive_policy_search(
    model: &ModelSpec,
    utility: &Utility,
    set: &UncertaintySet,
    max_policies: u64,
) -> Result<ExhaustiveSearch> {
    model.validate()?;
    utility.validate()?;
    set.validate()?;
    let members = finite_members(set)?;
    let modules = model.module_count();

    // Union of states reachable at each decision period under any policy.
    let mut decision_states: Vec<(u32, Vec<u32>)> = Vec::new();
    let mut layer: Vec<Vec<u32>> = alloc::vec![model.initial_defects.clone()];
    for t in 0..model.periods {
        let mut next: Vec<Vec<u32>> = Vec::new();
        for x in &layer {
            decision_states.push((t, x.clone()));
            for i in 0..modules {
                for k in 0..=x[i] {
                    let mut child = x.clone();
                    child[i] = k;
                    if !next.contains(&child) {
                        next.push(child);
                    }
                }
            }
        }
        layer = next;
    }

    let count = (modules as u128)
        .checked_pow(decision_states.len() as u32)
        .unwrap_or(u128::MAX);
    if count > u128::from(max_policies) {
        return Err(Error::Capacity {
            required: count,
            limit: u128::from(max_policies),
        });
    }

    let total = count as u64;
    let mut assignment: BTreeMap<(u32, Vec<u32>), usize> = BTreeMap::new();
    let mut digits = alloc::vec![0usize; decision_states.len()];
    let mut best = f64::NEG_INFINITY;
    for _ in 0..total {
        for (slot, (t, x)) in digits.iter().zip(&decision_states) {
            assignment.insert((*t, x.clone()), *slot);
        }
        let choice = |t: u32, x: &[u32]| {
            *assignment
                .get(&(t, x.to_vec()))
                .expect("decision states cover the reachable tree")
        };
        let mut budget = MAX_TREE_BRANCHES;
        let mut state = model.initial_defects.clone();
        let value = tree_value(model, utility, &members, &choice, &mut state, 0, &mut budget)?;
        if value > best {
            best = value;
        }
        // Next assignment in mixed radix.
        for d in digits.iter_mut() {
            *d += 1;
            if *d < modules {
                break;
            }
            *d = 0;
        }
    }
    Ok(ExhaustiveSearch {
        best_value: best,
        policies_enumerated: total,
    })
}

fn finite_members(set: &UncertaintySet) -> Result<Vec<&OperationalProfile>> {
    match set {
        UncertaintySet::Singleton(p) => Ok(alloc::vec![p]),
        UncertaintySet::Finite(members) => Ok(members.iter().collect()),
        _ => Err(Error::Unsupported(String::from(
            "brute-force enumeration supports singleton and finite profile sets",
        ))),
    }
}

/// Plain repeated multiplication; intentionally not the solver's binary
/// exponentiation.
fn pow_naive(base: f64, exp: u32) -> f64 {
    let mut v = 1.0;
    for _ in 0..exp {
        v *= base;
    }
    v
}

/// `C(n, k) q^k (1-q)^{n-k}` with the combinatorial factors and `q` powers
/// interleaved to stay in range.
fn binom_prob(n: u32, k: u32, q: f64) -> f64 {
    let mut v = pow_naive(1.0 - q, n - k);
    for j in 1..=k {
        v *= (n - k + j) as f64 / j as f64;
        v *= q;
    }
    v
}

fn terminal_score(
    model: &ModelSpec,
    utility: &Utility,
    members: &[&OperationalProfile],
    x: &[u32],
) -> Result<f64> {
    let mut min_r = f64::INFINITY;
    for member in members {
        let mut r = 0.0;
        for ((&xi, &theta), &p) in x
            .iter()
            .zip(&model.detection_prob)
            .zip(member.probabilities())
        {
            r += p * pow_naive(1.0 - theta, xi);
        }
        if r < min_r {
            min_r = r;
        }
    }
    utility.eval(min_r)
}

fn spend_branch(budget: &mut u64) -> Result<()> {
    if *budget == 0 {
        return Err(Error::Capacity {
            required: u128::from(MAX_TREE_BRANCHES) + 1,
            limit: u128::from(MAX_TREE_BRANCHES),
        });
    }
    *budget -= 1;
    Ok(())
}

fn tree_value(
    model: &ModelSpec,
    utility: &Utility,
    members: &[&OperationalProfile],
    choice: &dyn Fn(u32, &[u32]) -> usize,
    x: &mut Vec<u32>,
    t: u32,
    budget: &mut u64,
) -> Result<f64> {
    if t == model.periods {
        return terminal_score(model, utility, members, x);
    }
    let module = choice(t, x);
    let n = x[module];
    let q = 1.0 - model.detection_prob[module];
    let mut acc = 0.0;
    for k in 0..=n {
        spend_branch(budget)?;
        x[module] = k;
        let child = tree_value(model, utility, members, choice, x, t + 1, budget)?;
        acc += binom_prob(n, k, q) * child;
    }
    x[module] = n;
    Ok(acc)
}

fn tree_optimal(
    model: &ModelSpec,
    utility: &Utility,
    members: &[&OperationalProfile],
    x: &mut Vec<u32>,
    t: u32,
    budget: &mut u64,
) -> Result<f64> {
    if t == model.periods {
        return terminal_score(model, utility, members, x);
    }
    let mut best = f64::NEG_INFINITY;
    for module in 0..model.module_count() {
        let n = x[module];
        let q = 1.0 - model.detection_prob[module];
        let mut acc = 0.0;
        for k in 0..=n {
            spend_branch(budget)?;
            x[module] = k;
            let child = tree_optimal(model, utility, members, x, t + 1, budget)?;
            acc += binom_prob(n, k, q) * child;
        }
        x[module] = n;
        if acc > best {
            best = acc;
        }
    }
    Ok(best)
}

/// Check that values never increase when any defect count does:
/// `J_t(x + e_i) ≤ J_t(x) + tol` over every retained slice.
pub fn scan_monotone_x(table: &ValueTable) -> PropertyReport {
    let grid = table.grid();
    let mut witnesses = Vec::new();
    let mut checked = 0u64;
    for &t in table.periods() {
        let slice = table.slice(t).expect("period listed as retained");
        for idx in 0..grid.len() {
            checked += 1;
            let mut violated = false;
            for axis in 0..grid.axes() {
                if grid.coordinate(idx, axis) + 1 < grid.dims()[axis] {
                    let up = idx + grid.stride(axis);
                    if slice[up] > slice[idx] + SCAN_TOLERANCE {
                        violated = true;
                    }
                }
            }
            if violated {
                witnesses.push(DefectState::new(grid.state_of(idx), t));
            }
        }
    }
    PropertyReport::new("value non-increasing in defect counts", witnesses, checked)
}

/// Check that values never increase as testing time runs out:
/// `J_t(x) ≥ J_{t'}(x) - tol` for consecutive retained periods `t < t'`.
pub fn scan_monotone_t(table: &ValueTable) -> PropertyReport {
    let grid = table.grid();
    let mut witnesses = Vec::new();
    let mut checked = 0u64;
    for pair in table.periods().windows(2) {
        let (earlier, later) = (pair[0], pair[1]);
        let early_slice = table.slice(earlier).expect("retained");
        let late_slice = table.slice(later).expect("retained");
        for idx in 0..grid.len() {
            checked += 1;
            if early_slice[idx] < late_slice[idx] - SCAN_TOLERANCE {
                witnesses.push(DefectState::new(grid.state_of(idx), earlier));
            }
        }
    }
    PropertyReport::new("value non-increasing in elapsed periods", witnesses, checked)
}

/// Axiswise discrete convexity:
/// `J_t(x + e_i) + J_t(x - e_i) ≥ 2 J_t(x) - tol`. Holds for the identity
/// utility with a known profile; known counterexamples exist outside that
/// regime.
pub fn scan_convexity(table: &ValueTable) -> PropertyReport {
    let grid = table.grid();
    let mut witnesses = Vec::new();
    let mut checked = 0u64;
    for &t in table.periods() {
        let slice = table.slice(t).expect("retained");
        for idx in 0..grid.len() {
            checked += 1;
            let mut violated = false;
            for axis in 0..grid.axes() {
                let xi = grid.coordinate(idx, axis);
                if xi >= 1 && xi + 1 < grid.dims()[axis] {
                    let stride = grid.stride(axis);
                    let second_diff =
                        slice[idx + stride] + slice[idx - stride] - 2.0 * slice[idx];
                    if second_diff < -SCAN_TOLERANCE {
                        violated = true;
                    }
                }
            }
            if violated {
                witnesses.push(DefectState::new(grid.state_of(idx), t));
            }
        }
    }
    PropertyReport::new("value discretely convex along axes", witnesses, checked)
}

/// A pair of states showing the optimal policy is not monotone: module
/// `module` is chosen at `state`, but not after one more defect in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyWitness {
    pub period: u32,
    pub state: Vec<u32>,
    pub module: usize,
    pub conflicting_choice: usize,
}

/// Search a fresh solve of the model for the first (lexicographic in
/// `(t, x)`) violation of policy monotonicity, if any.
pub fn find_nonmonotone_policy(
    model: &ModelSpec,
    utility: &Utility,
    set: &UncertaintySet,
) -> Result<Option<PolicyWitness>> {
    let report = solve(model, utility, set)?;
    Ok(find_nonmonotone_in(&report.policy))
}

/// Scan an existing policy table for the first monotonicity violation.
pub fn find_nonmonotone_in(policy: &PolicyTable) -> Option<PolicyWitness> {
    let grid = policy.grid();
    for t in 0..policy.horizon() {
        for idx in 0..grid.len() {
            let module = policy.choice_by_index(t, idx);
            let axis = module;
            if grid.coordinate(idx, axis) + 1 < grid.dims()[axis] {
                let up = idx + grid.stride(axis);
                let conflicting = policy.choice_by_index(t, up);
                if conflicting != module {
                    return Some(PolicyWitness {
                        period: t,
                        state: grid.state_of(idx),
                        module,
                        conflicting_choice: conflicting,
                    });
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve, solve_with_options, SolveOptions};

    fn profile(p: &[f64]) -> OperationalProfile {
        OperationalProfile::new(p.to_vec()).unwrap()
    }

    fn singleton(p: &[f64]) -> UncertaintySet {
        UncertaintySet::Singleton(profile(p))
    }

    #[test]
    fn hand_enumerated_two_defect_value() {
        // One module, two defects, θ = 1/2, one period:
        // E[(1/2)^survivors] = 1/4·1 + 1/2·1/2 + 1/4·1/4 = 0.5625.
        let model = ModelSpec::new(vec![2], vec![0.5], 1);
        let v = brute_force_value(&model, &Utility::Identity, &singleton(&[1.0]), PolicyMode::Optimal)
            .unwrap();
        assert!((v - 0.5625).abs() <= 1e-15, "got {v}");
        // Same value when following the solver's policy.
        let report = solve(&model, &Utility::Identity, &singleton(&[1.0])).unwrap();
        let fixed = brute_force_value(
            &model,
            &Utility::Identity,
            &singleton(&[1.0]),
            PolicyMode::Fixed(&report.policy),
        )
        .unwrap();
        assert_eq!(v, fixed);
        assert!((report.value_at_start - v).abs() <= 1e-12);
    }

    #[test]
    fn defect_free_model_scores_utility_of_one() {
        let model = ModelSpec::new(vec![0, 0], vec![0.4, 0.3], 2);
        for utility in [
            Utility::Identity,
            Utility::Quadratic,
            Utility::Exponential { risk_tolerance: 2.0 },
        ] {
            let v = brute_force_value(&model, &utility, &singleton(&[0.5, 0.5]), PolicyMode::Optimal)
                .unwrap();
            assert!((v - utility.eval(1.0).unwrap()).abs() <= 1e-15);
        }
    }

    #[test]
    fn agrees_with_solver_on_small_two_module_instance() {
        let model = ModelSpec::new(vec![4, 3], vec![0.2, 0.1], 2);
        let set = singleton(&[0.2, 0.8]);
        let report = solve(&model, &Utility::Identity, &set).unwrap();
        let oracle =
            brute_force_value(&model, &Utility::Identity, &set, PolicyMode::Optimal).unwrap();
        assert!(
            (report.value_at_start - oracle).abs() <= 1e-12,
            "solver {} vs oracle {oracle}",
            report.value_at_start
        );
    }

    #[test]
    fn tree_budget_is_enforced() {
        let model = ModelSpec::new(vec![200], vec![0.5], 3);
        assert!(matches!(
            brute_force_value(&model, &Utility::Identity, &singleton(&[1.0]), PolicyMode::Optimal),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn continuous_sets_are_rejected() {
        let model = ModelSpec::new(vec![1, 1], vec![0.5, 0.5], 1);
        let set = UncertaintySet::Interval {
            lower: alloc::vec![0.2, 0.2],
            upper: alloc::vec![0.8, 0.8],
        };
        assert!(matches!(
            brute_force_value(&model, &Utility::Identity, &set, PolicyMode::Optimal),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn exhaustive_search_confirms_solver_optimum() {
        let model = ModelSpec::new(vec![1, 1], vec![0.3, 0.6], 2);
        let set = singleton(&[0.4, 0.6]);
        let search =
            exhaustive_policy_search(&model, &Utility::Identity, &set, 64).unwrap();
        assert_eq!(search.policies_enumerated, 16);
        let report = solve(&model, &Utility::Identity, &set).unwrap();
        assert!(
            (search.best_value - report.value_at_start).abs() <= 1e-12,
            "exhaustive {} vs solver {}",
            search.best_value,
            report.value_at_start
        );
        // No deterministic Markov policy beats the solver.
        assert!(search.best_value <= report.value_at_start + 1e-12);
    }

    #[test]
    fn exhaustive_search_respects_policy_cap() {
        // 6 decision states on the union tree: 2^6 = 64 policies.
        let model = ModelSpec::new(vec![2, 2], vec![0.3, 0.6], 2);
        assert!(matches!(
            exhaustive_policy_search(&model, &Utility::Identity, &singleton(&[0.5, 0.5]), 32),
            Err(Error::Capacity { .. })
        ));
        let ok = exhaustive_policy_search(&model, &Utility::Identity, &singleton(&[0.5, 0.5]), 64)
            .unwrap();
        assert_eq!(ok.policies_enumerated, 64);
    }

    #[test]
    fn scans_hold_on_risk_neutral_known_profile_solve() {
        let model = ModelSpec::new(vec![8, 10], vec![0.15, 0.2], 6);
        let report = solve(&model, &Utility::Identity, &singleton(&[0.2, 0.8])).unwrap();
        let mx = scan_monotone_x(&report.values);
        assert!(mx.holds, "{:?}", mx.witnesses.first());
        let mt = scan_monotone_t(&report.values);
        assert!(mt.holds, "{:?}", mt.witnesses.first());
        let cv = scan_convexity(&report.values);
        assert!(cv.holds, "{:?}", cv.witnesses.first());
        assert_eq!(mx.states_checked, 9 * 11 * 7);
    }

    #[test]
    fn scans_are_vacuous_on_single_state_model() {
        let model = ModelSpec::new(vec![0], vec![0.5], 1);
        let report = solve(&model, &Utility::Identity, &singleton(&[1.0])).unwrap();
        assert!(scan_monotone_x(&report.values).holds);
        assert!(scan_monotone_t(&report.values).holds);
        assert!(scan_convexity(&report.values).holds);
    }

    #[test]
    fn injected_fault_is_detected_with_correct_witness() {
        let model = ModelSpec::new(vec![3, 3], vec![0.3, 0.3], 2);
        let report = solve(&model, &Utility::Identity, &singleton(&[0.5, 0.5])).unwrap();
        let grid = report.values.grid();
        let mut slices: Vec<Vec<f64>> = report
            .values
            .periods()
            .iter()
            .map(|&t| report.values.slice(t).unwrap().to_vec())
            .collect();
        // Bump J_1(2, 1) above J_1(1, 1).
        let target = grid.index_of(&[2, 1]);
        slices[1][target] += 0.1;
        let table = ValueTable::from_slices(&model.initial_defects, slices).unwrap();
        let mx = scan_monotone_x(&table);
        assert!(!mx.holds);
        assert!(mx
            .witnesses
            .iter()
            .any(|w| w.period == 1 && w.counts == alloc::vec![1, 1]));
        let mt = scan_monotone_t(&table);
        assert!(!mt.holds);
    }

    #[test]
    fn quadratic_terminal_breaks_convexity_near_two() {
        // One module, θ = 0.1, quadratic utility: the terminal slice has a
        // negative second difference at x = 2.
        let model = ModelSpec::new(vec![6], vec![0.1], 1);
        let report = solve(&model, &Utility::Quadratic, &singleton(&[1.0])).unwrap();
        let cv = scan_convexity(&report.values);
        assert!(!cv.holds);
        assert!(cv
            .witnesses
            .iter()
            .any(|w| w.period == 1 && w.counts == alloc::vec![2]));
    }

    #[test]
    fn two_member_set_breaks_convexity_at_counterexample_state() {
        let model = ModelSpec::new(vec![13, 19], vec![0.3, 0.2], 1);
        let set = UncertaintySet::Finite(alloc::vec![profile(&[0.2, 0.8]), profile(&[0.8, 0.2])]);
        let report = solve(&model, &Utility::Identity, &set).unwrap();
        let cv = scan_convexity(&report.values);
        assert!(!cv.holds);
        assert!(
            cv.witnesses
                .iter()
                .any(|w| w.period == 1 && w.counts == alloc::vec![12, 19]),
            "witnesses: {:?}",
            cv.witnesses
        );
    }

    #[test]
    fn single_module_policy_is_monotone() {
        let model = ModelSpec::new(vec![6], vec![0.3], 3);
        let witness =
            find_nonmonotone_policy(&model, &Utility::Identity, &singleton(&[1.0])).unwrap();
        assert!(witness.is_none());
    }

    #[test]
    fn known_profile_example_has_nonmonotone_policy() {
        let model = ModelSpec::new(vec![30, 20], vec![0.2, 0.1], 2);
        let witness =
            find_nonmonotone_policy(&model, &Utility::Identity, &singleton(&[0.2, 0.8]))
                .unwrap()
                .expect("a witness exists on this grid");
        assert!(witness.period < 2);
        assert_ne!(witness.module, witness.conflicting_choice);
    }

    #[test]
    fn report_holds_flag_tracks_witnesses() {
        let model = ModelSpec::new(vec![2], vec![0.4], 1);
        let report = solve(&model, &Utility::Identity, &singleton(&[1.0])).unwrap();
        let scan = scan_monotone_x(&report.values);
        assert_eq!(scan.holds, scan.witnesses.is_empty());
    }

    #[test]
    fn scans_accept_partial_tables() {
        let model = ModelSpec::new(vec![4, 4], vec![0.3, 0.2], 5);
        let thin = solve_with_options(
            &model,
            &Utility::Identity,
            &singleton(&[0.5, 0.5]),
            &SolveOptions {
                retention: crate::solver::Retention::FirstAndLast,
                ..SolveOptions::default()
            },
        )
        .unwrap();
        assert!(scan_monotone_x(&thin.values).holds);
        assert!(scan_monotone_t(&thin.values).holds);
    }
}
