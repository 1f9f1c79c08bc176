//! Seeded Monte Carlo simulation of the testing process under a fixed
//! policy.
//!
//! Each replication follows the policy for `T` periods; every defect of the
//! tested module survives the period independently with probability
//! `1 - θ_i`. The delivered reliability of the terminal state is scored
//! against an explicit profile — robust policies are never implicitly scored
//! against their worst case.
//!
//! Randomness is counter-based: every `(seed, run, period, module)` tuple
//! keys its own SplitMix64 stream, so replications can be sharded across any
//! number of workers and still produce bit-identical aggregates.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{reliability_unchecked, ModelSpec, OperationalProfile};
use crate::solver::PolicyTable;

/// Default number of histogram bins over [0, 1].
pub const DEFAULT_HISTOGRAM_BINS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub runs: u64,
    pub seed: u64,
    /// Profile used to score terminal reliability.
    pub scoring_profile: OperationalProfile,
    pub histogram_bins: usize,
}

impl SimulationConfig {
    pub fn new(runs: u64, seed: u64, scoring_profile: OperationalProfile) -> Self {
        Self {
            runs,
            seed,
            scoring_profile,
            histogram_bins: DEFAULT_HISTOGRAM_BINS,
        }
    }

    fn validate(&self, model: &ModelSpec) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::validation("runs", "at least one replication is required"));
        }
        if self.histogram_bins == 0 {
            return Err(Error::validation("histogram_bins", "at least one bin is required"));
        }
        if self.scoring_profile.len() != model.module_count() {
            return Err(Error::DimensionMismatch {
                expected: model.module_count(),
                actual: self.scoring_profile.len(),
            });
        }
        Ok(())
    }
}

/// Empirical distribution of delivered reliability over the replications.
///
/// `variance` is the population variance (divide by `runs`).
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationStats {
    pub runs: u64,
    pub seed: u64,
    pub mean: f64,
    pub variance: f64,
    /// `bins + 1` uniform edges over [0, 1].
    pub bin_edges: Vec<f64>,
    /// Right-closed last bin, so reliability 1.0 is counted.
    pub bin_counts: Vec<u64>,
    pub terminal_state_counts: BTreeMap<Vec<u32>, u64>,
}

/// SplitMix64 finalizer.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// A stream of uniforms keyed by `(seed, run, period, module)`.
#[derive(Debug, Clone)]
pub struct PeriodRng {
    state: u64,
}

impl PeriodRng {
    pub fn new(seed: u64, run: u64, period: u32, module: usize) -> Self {
        let mut key = mix(seed ^ GOLDEN);
        key = mix(key ^ run.wrapping_mul(0xD1B5_4A32_D192_ED03));
        key = mix(key ^ u64::from(period).wrapping_mul(0x8CB9_2BA7_2F3D_8DD7));
        key = mix(key ^ (module as u64).wrapping_mul(0x2545_F491_4F6C_DD1D));
        Self { state: key }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix(self.state)
    }

    /// Uniform in [0, 1) with 53 random bits.
    #[inline]
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }
}

/// Run one replication: follow the policy for `T` periods and score the
/// terminal state. Returns the terminal defect counts and the delivered
/// reliability.
pub fn simulate_once(
    model: &ModelSpec,
    policy: &PolicyTable,
    scoring_profile: &OperationalProfile,
    seed: u64,
    run: u64,
) -> Result<(Vec<u32>, f64)> {
    model.validate()?;
    check_policy(model, policy)?;
    if scoring_profile.len() != model.module_count() {
        return Err(Error::DimensionMismatch {
            expected: model.module_count(),
            actual: scoring_profile.len(),
        });
    }
    Ok(run_replication(model, policy, scoring_profile, seed, run))
}

fn run_replication(
    model: &ModelSpec,
    policy: &PolicyTable,
    scoring_profile: &OperationalProfile,
    seed: u64,
    run: u64,
) -> (Vec<u32>, f64) {
    let mut counts = model.initial_defects.clone();
    for t in 0..model.periods {
        let module = policy.choice(t, &counts);
        let theta = model.detection_prob[module];
        let mut rng = PeriodRng::new(seed, run, t, module);
        let mut survivors = 0u32;
        for _ in 0..counts[module] {
            if rng.next_unit() >= theta {
                survivors += 1;
            }
        }
        counts[module] = survivors;
    }
    let r = reliability_unchecked(
        &counts,
        scoring_profile.probabilities(),
        &model.detection_prob,
    );
    (counts, r)
}

fn check_policy(model: &ModelSpec, policy: &PolicyTable) -> Result<()> {
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
    let expected: Vec<u32> = model.initial_defects.iter().map(|&n| n + 1).collect();
    if policy.grid().dims() != expected.as_slice() {
        return Err(Error::validation(
            "policy",
            "policy grid does not match the model's state grid",
        ));
    }
    Ok(())
}

/// Run `cfg.runs` independent replications sequentially and aggregate.
pub fn simulate_many(
    model: &ModelSpec,
    policy: &PolicyTable,
    cfg: &SimulationConfig,
) -> Result<SimulationStats> {
    simulate_many_with_workers(model, policy, cfg, 1)
}

/// Run replications sharded over `workers` threads (with `std`; otherwise
/// sequential). Results are aggregated in run order, so the outcome is
/// bit-identical for every worker count.
pub fn simulate_many_with_workers(
    model: &ModelSpec,
    policy: &PolicyTable,
    cfg: &SimulationConfig,
    workers: usize,
) -> Result<SimulationStats> {
    model.validate()?;
    check_policy(model, policy)?;
    cfg.validate(model)?;

    let runs = cfg.runs as usize;
    let mut outcomes: Vec<(Vec<u32>, f64)> = alloc::vec![(Vec::new(), 0.0); runs];

    #[cfg(feature = "std")]
    let effective_workers = workers.max(1).min(runs.max(1));
    #[cfg(not(feature = "std"))]
    let effective_workers = {
        let _ = workers;
        1
    };

    if effective_workers <= 1 {
        for (run, slot) in outcomes.iter_mut().enumerate() {
            *slot = run_replication(model, policy, &cfg.scoring_profile, cfg.seed, run as u64);
        }
    } else {
        #[cfg(feature = "std")]
        {
            let chunk = runs.div_ceil(effective_workers);
            std::thread::scope(|scope| {
                for (w, block) in outcomes.chunks_mut(chunk).enumerate() {
                    let first_run = w * chunk;
                    scope.spawn(move || {
                        for (offset, slot) in block.iter_mut().enumerate() {
                            *slot = run_replication(
                                model,
                                policy,
                                &cfg.scoring_profile,
                                cfg.seed,
                                (first_run + offset) as u64,
                            );
                        }
                    });
                }
            });
        }
    }

    Ok(aggregate(cfg, outcomes))
}

/// Kahan-compensated sum over a fixed iteration order.
fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

fn aggregate(cfg: &SimulationConfig, outcomes: Vec<(Vec<u32>, f64)>) -> SimulationStats {
    let runs = outcomes.len() as f64;
    let mean = kahan_sum(outcomes.iter().map(|(_, r)| *r)) / runs;
    let variance = kahan_sum(outcomes.iter().map(|(_, r)| {
        let d = r - mean;
        d * d
    })) / runs;

    let bins = cfg.histogram_bins;
    let mut bin_counts = alloc::vec![0u64; bins];
    let mut terminal_state_counts: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
    for (state, r) in outcomes {
        let mut b = (r * bins as f64) as usize;
        if b >= bins {
            b = bins - 1;
        }
        bin_counts[b] += 1;
        *terminal_state_counts.entry(state).or_insert(0) += 1;
    }
    let bin_edges = (0..=bins).map(|i| i as f64 / bins as f64).collect();

    SimulationStats {
        runs: cfg.runs,
        seed: cfg.seed,
        mean,
        variance,
        bin_edges,
        bin_counts,
        terminal_state_counts,
    }
}
