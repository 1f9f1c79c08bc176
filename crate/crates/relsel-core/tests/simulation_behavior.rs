//! Statistical behavior of the Monte Carlo simulator against exact DP
//! quantities.

use std::collections::BTreeMap;

use relsel_core::{
    simulate_many, solve, ModelSpec, OperationalProfile, SimulationConfig, UncertaintySet,
    Utility,
};

fn profile(p: &[f64]) -> OperationalProfile {
    OperationalProfile::new(p.to_vec()).unwrap()
}

#[test]
fn empirical_mean_is_unbiased_across_seeds() {
    // The DP value is the exact expectation of the simulated reliability for
    // the identity utility and a known profile, so the empirical mean must
    // sit within 4 standard errors almost always (4σ two-sided miss rate is
    // about 6e-5 per trial; tolerate one miss in a hundred seeds).
    let model = ModelSpec::new(vec![5, 4], vec![0.3, 0.2], 4);
    let p = profile(&[0.35, 0.65]);
    let set = UncertaintySet::Singleton(p.clone());
    let report = solve(&model, &Utility::Identity, &set).unwrap();
    let runs = 2000u64;
    let mut misses = 0;
    for seed in 0..100u64 {
        let cfg = SimulationConfig::new(runs, seed, p.clone());
        let stats = simulate_many(&model, &report.policy, &cfg).unwrap();
        let se = (stats.variance / runs as f64).sqrt();
        if (stats.mean - report.value_at_start).abs() > 4.0 * se {
            misses += 1;
        }
    }
    assert!(misses <= 1, "{misses} of 100 seeds fell outside 4 standard errors");
}

/// Exact terminal-state distribution by trajectory enumeration.
fn exact_terminal_distribution(
    model: &ModelSpec,
    policy: &relsel_core::PolicyTable,
) -> BTreeMap<Vec<u32>, f64> {
    fn recurse(
        model: &ModelSpec,
        policy: &relsel_core::PolicyTable,
        x: &mut Vec<u32>,
        t: u32,
        prob: f64,
        out: &mut BTreeMap<Vec<u32>, f64>,
    ) {
        if t == model.periods {
            *out.entry(x.clone()).or_insert(0.0) += prob;
            return;
        }
        let module = policy.choice(t, x);
        let n = x[module];
        let q = 1.0 - model.detection_prob[module];
        for k in 0..=n {
            let mut branch = (1.0 - q).powi((n - k) as i32);
            for j in 1..=k {
                branch *= (n - k + j) as f64 / j as f64 * q;
            }
            x[module] = k;
            recurse(model, policy, x, t + 1, prob * branch, out);
        }
        x[module] = n;
    }
    let mut out = BTreeMap::new();
    let mut x = model.initial_defects.clone();
    recurse(model, policy, &mut x, 0, 1.0, &mut out);
    out
}

/// Upper chi-square quantile by the Wilson-Hilferty approximation.
fn chi_square_critical(df: f64, z: f64) -> f64 {
    let a = 2.0 / (9.0 * df);
    df * (1.0 - a + z * a.sqrt()).powi(3)
}

#[test]
fn terminal_distribution_matches_exact_enumeration() {
    let model = ModelSpec::new(vec![2, 1], vec![0.4, 0.3], 2);
    let p = profile(&[0.5, 0.5]);
    let set = UncertaintySet::Singleton(p.clone());
    let report = solve(&model, &Utility::Identity, &set).unwrap();
    let exact = exact_terminal_distribution(&model, &report.policy);
    let total: f64 = exact.values().sum();
    assert!((total - 1.0).abs() <= 1e-12);

    let runs = 20_000u64;
    let cfg = SimulationConfig::new(runs, 31337, p);
    let stats = simulate_many(&model, &report.policy, &cfg).unwrap();

    // Pool low-expectation states to keep the chi-square approximation
    // honest.
    let mut statistic = 0.0;
    let mut pooled_expected = 0.0;
    let mut pooled_observed = 0.0;
    let mut cells = 0usize;
    for (state, prob) in &exact {
        let expected = prob * runs as f64;
        let observed = stats
            .terminal_state_counts
            .get(state)
            .copied()
            .unwrap_or(0) as f64;
        if expected < 5.0 {
            pooled_expected += expected;
            pooled_observed += observed;
        } else {
            statistic += (observed - expected).powi(2) / expected;
            cells += 1;
        }
    }
    if pooled_expected > 0.0 {
        statistic += (pooled_observed - pooled_expected).powi(2) / pooled_expected;
        cells += 1;
    }
    let df = (cells - 1).max(1) as f64;
    // z for significance 0.001.
    let critical = chi_square_critical(df, 3.090232306167813);
    assert!(
        statistic <= critical,
        "chi-square {statistic:.2} exceeds critical {critical:.2} at df {df}"
    );
    // Every simulated terminal state must be possible.
    for state in stats.terminal_state_counts.keys() {
        assert!(exact.contains_key(state), "impossible state {state:?}");
    }
}

#[test]
fn huge_risk_tolerance_behaves_like_identity() {
    let model = ModelSpec::new(vec![10, 8], vec![0.15, 0.25], 8);
    let p = profile(&[0.45, 0.55]);
    let set = UncertaintySet::Singleton(p.clone());
    let neutral = solve(&model, &Utility::Identity, &set).unwrap();
    let almost_neutral = solve(
        &model,
        &Utility::Exponential { risk_tolerance: 1e6 },
        &set,
    )
    .unwrap();
    let runs = 4000u64;
    let cfg = SimulationConfig::new(runs, 7, p);
    let a = simulate_many(&model, &neutral.policy, &cfg).unwrap();
    let b = simulate_many(&model, &almost_neutral.policy, &cfg).unwrap();
    let se = ((a.variance + b.variance) / runs as f64).sqrt();
    assert!(
        (a.mean - b.mean).abs() <= 2.0 * se.max(1e-12),
        "means {} vs {} (se {se})",
        a.mean,
        b.mean
    );
}
