//! Process model: modules, defect counts, detection probabilities,
//! operational profiles, utilities, and the delivered-reliability measure.
//!
//! A session exercises one module drawn from the operational profile `p`;
//! each residual defect in module `i` independently triggers a failure with
//! probability `θ_i`, so the failure-free session probability is
//! `R(x, p) = Σ_i p_i (1 - θ_i)^{x_i}`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result, Violation};
use crate::math;

/// Default cap on the defect-count grid size `Π (N_i + 1)`.
pub const DEFAULT_STATE_CAP: u64 = 10_000_000;

/// Tolerance on `|Σ p_i - 1|` for operational profiles.
pub const PROFILE_SUM_TOLERANCE: f64 = 1e-12;

/// Tolerance for utility-domain checks on reliabilities.
pub const DOMAIN_TOLERANCE: f64 = 1e-9;

/// The testing problem: per-module initial defect counts, per-defect
/// detection probabilities, and the number of testing periods.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    /// Initial defect count `N_i` per module.
    pub initial_defects: Vec<u32>,
    /// Per-defect detection/failure probability `θ_i`, strictly inside (0, 1).
    pub detection_prob: Vec<f64>,
    /// Number of testing periods before release.
    pub periods: u32,
}

impl ModelSpec {
    pub fn new(initial_defects: Vec<u32>, detection_prob: Vec<f64>, periods: u32) -> Self {
        Self {
            initial_defects,
            detection_prob,
            periods,
        }
    }

    /// Number of modules.
    pub fn module_count(&self) -> usize {
        self.initial_defects.len()
    }

    /// Grid cardinality `Π (N_i + 1)`, saturating at `u128::MAX`.
    pub fn state_count(&self) -> u128 {
        self.initial_defects
            .iter()
            .fold(1u128, |acc, &n| acc.saturating_mul(u128::from(n) + 1))
    }

    /// Validate against the default state cap.
    pub fn validate(&self) -> Result<ValidatedModel> {
        self.validate_with_cap(DEFAULT_STATE_CAP)
    }

    /// Check every model invariant, collecting all violations, then enforce
    /// the state-space cap.
    pub fn validate_with_cap(&self, cap: u64) -> Result<ValidatedModel> {
        let mut violations = Vec::new();
        if self.initial_defects.is_empty() {
            violations.push(Violation::new("N", "at least one module is required"));
        }
        if self.detection_prob.len() != self.initial_defects.len() {
            violations.push(Violation::new(
                "theta",
                format!(
                    "length {} does not match module count {}",
                    self.detection_prob.len(),
                    self.initial_defects.len()
                ),
            ));
        }
        for (i, &theta) in self.detection_prob.iter().enumerate() {
            if !(theta > 0.0 && theta < 1.0) {
                violations.push(Violation::new(
                    format!("theta[{}]", i + 1),
                    format!("must lie strictly inside (0, 1), got {theta}"),
                ));
            }
        }
        if self.periods == 0 {
            violations.push(Violation::new("T", "at least one testing period is required"));
        }
        if !violations.is_empty() {
            return Err(Error::Validation(violations));
        }
        let states = self.state_count();
        if states > u128::from(cap) {
            return Err(Error::Capacity {
                required: states,
                limit: u128::from(cap),
            });
        }
        Ok(ValidatedModel {
            spec: self.clone(),
            state_count: states as u64,
        })
    }
}

/// A model that passed validation, together with its grid size.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedModel {
    pub spec: ModelSpec,
    pub state_count: u64,
}

/// Check every [`ModelSpec`] invariant under the default state cap.
pub fn validate_model(spec: &ModelSpec) -> Result<ValidatedModel> {
    spec.validate()
}

/// A point of the testing process: residual defect counts at the start of a
/// period.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DefectState {
    pub counts: Vec<u32>,
    pub period: u32,
}

impl DefectState {
    pub fn new(counts: Vec<u32>, period: u32) -> Self {
        Self { counts, period }
    }

    /// Verify `0 ≤ counts_i ≤ N_i` componentwise and `period ≤ T`.
    pub fn validate_against(&self, model: &ModelSpec) -> Result<()> {
        if self.counts.len() != model.module_count() {
            return Err(Error::DimensionMismatch {
                expected: model.module_count(),
                actual: self.counts.len(),
            });
        }
        let mut violations = Vec::new();
        for (i, (&x, &n)) in self.counts.iter().zip(&model.initial_defects).enumerate() {
            if x > n {
                violations.push(Violation::new(
                    format!("x[{}]", i + 1),
                    format!("count {x} exceeds initial defects {n}"),
                ));
            }
        }
        if self.period > model.periods {
            violations.push(Violation::new(
                "t",
                format!("period {} exceeds horizon {}", self.period, model.periods),
            ));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(violations))
        }
    }
}

/// A probability vector over modules: how users exercise the software after
/// release.
#[derive(Debug, Clone, PartialEq, PartialOrd)]
pub struct OperationalProfile(Vec<f64>);

impl OperationalProfile {
    /// Build a profile, collecting every violated constraint
    /// (`p_i ≥ 0`, `|Σ p_i - 1| ≤ 1e-12`).
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        let mut violations = Vec::new();
        if probabilities.is_empty() {
            violations.push(Violation::new("p", "profile must not be empty"));
        }
        for (i, &p) in probabilities.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                violations.push(Violation::new(
                    format!("p[{}]", i + 1),
                    format!("must be a finite nonnegative probability, got {p}"),
                ));
            }
        }
        let sum: f64 = probabilities.iter().sum();
        if math::abs(sum - 1.0) > PROFILE_SUM_TOLERANCE {
            violations.push(Violation::new(
                "p",
                format!("components must sum to 1 within 1e-12, got {sum}"),
            ));
        }
        if violations.is_empty() {
            Ok(Self(probabilities))
        } else {
            Err(Error::Validation(violations))
        }
    }

    /// Internal constructor for profiles produced by the solvers themselves.
    /// Accepts the looser 1e-9 feasibility tolerance documented for
    /// worst-case results.
    pub(crate) fn from_computed(probabilities: Vec<f64>) -> Self {
        debug_assert!({
            let sum: f64 = probabilities.iter().sum();
            math::abs(sum - 1.0) <= 1e-9 && probabilities.iter().all(|&p| p >= -1e-9)
        });
        Self(probabilities)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// The tester's risk attitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Utility {
    /// Risk neutral: `U(r) = r`.
    Identity,
    /// `U(r) = r - r²`. Increasing only up to r = 1/2; retained verbatim for
    /// the counterexample regime. Solvers emit a warning when it is used as
    /// an objective.
    Quadratic,
    /// Risk averse: `U(r) = 1 - exp(-r / risk_tolerance)`. Approaches the
    /// identity ordering as the tolerance grows.
    Exponential { risk_tolerance: f64 },
}

impl Utility {
    pub fn validate(&self) -> Result<()> {
        match self {
            Utility::Exponential { risk_tolerance } => {
                if !(risk_tolerance.is_finite() && *risk_tolerance > 0.0) {
                    Err(Error::validation(
                        "gamma",
                        format!("risk tolerance must be positive and finite, got {risk_tolerance}"),
                    ))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Evaluate the utility at a reliability `r ∈ [0, 1]` (tolerance 1e-9).
    pub fn eval(&self, r: f64) -> Result<f64> {
        self.validate()?;
        if !(-DOMAIN_TOLERANCE..=1.0 + DOMAIN_TOLERANCE).contains(&r) {
            return Err(Error::Domain(format!(
                "utility argument must lie in [0, 1] within 1e-9, got {r}"
            )));
        }
        Ok(match self {
            Utility::Identity => r,
            Utility::Quadratic => r - r * r,
            Utility::Exponential { risk_tolerance } => -math::expm1(-r / risk_tolerance),
        })
    }

    /// Short name for reports.
    pub fn kind_name(&self) -> &'static str {
        match self {
            Utility::Identity => "identity",
            Utility::Quadratic => "quadratic",
            Utility::Exponential { .. } => "exponential",
        }
    }
}

/// Evaluate a utility at a reliability value.
pub fn utility_eval(utility: &Utility, r: f64) -> Result<f64> {
    utility.eval(r)
}

/// Delivered reliability `R(x, p) = Σ_i p_i (1 - θ_i)^{x_i}`.
///
/// Deterministic, and non-increasing in every component of `x`.
pub fn reliability(
    defect_counts: &[u32],
    profile: &OperationalProfile,
    detection_prob: &[f64],
) -> Result<f64> {
    if profile.len() != defect_counts.len() {
        return Err(Error::DimensionMismatch {
            expected: defect_counts.len(),
            actual: profile.len(),
        });
    }
    if detection_prob.len() != defect_counts.len() {
        return Err(Error::DimensionMismatch {
            expected: defect_counts.len(),
            actual: detection_prob.len(),
        });
    }
    for (i, &theta) in detection_prob.iter().enumerate() {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::validation(
                format!("theta[{}]", i + 1),
                format!("must lie strictly inside (0, 1), got {theta}"),
            ));
        }
    }
    Ok(reliability_unchecked(
        defect_counts,
        profile.probabilities(),
        detection_prob,
    ))
}

/// Dot product `Σ p_i (1 - θ_i)^{x_i}` without validation; shared by the
/// solvers on pre-validated inputs.
pub(crate) fn reliability_unchecked(defect_counts: &[u32], probs: &[f64], theta: &[f64]) -> f64 {
    defect_counts
        .iter()
        .zip(probs)
        .zip(theta)
        .map(|((&x, &p), &th)| p * math::powi(1.0 - th, x))
        .sum()
}

/// Survival pmf for the defects of one module under a single test:
/// `pmf[k] = C(n, k) q^k (1 - q)^{n-k}` with `q = 1 - θ` the per-defect
/// survival probability.
#[derive(Debug, Clone, PartialEq)]
pub struct BinomialKernel {
    trials: u32,
    survival_prob: f64,
    pmf: Vec<f64>,
}

impl BinomialKernel {
    /// Build the pmf by the stable multiplicative recurrence
    /// `pmf[k+1] = pmf[k] · (n-k)/(k+1) · q/(1-q)`, seeded at whichever
    /// endpoint (`(1-q)^n` or `q^n`) is larger.
    pub fn new(trials: u32, survival_prob: f64) -> Result<Self> {
        let q = survival_prob;
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::validation(
                "q",
                format!("survival probability must lie strictly inside (0, 1), got {q}"),
            ));
        }
        let n = trials as usize;
        let mut pmf = alloc::vec![0.0; n + 1];
        if q <= 0.5 {
            pmf[0] = math::powi(1.0 - q, trials);
            let ratio = q / (1.0 - q);
            for k in 0..n {
                pmf[k + 1] = pmf[k] * ((n - k) as f64 / (k + 1) as f64) * ratio;
            }
        } else {
            pmf[n] = math::powi(q, trials);
            let ratio = (1.0 - q) / q;
            for k in (1..=n).rev() {
                pmf[k - 1] = pmf[k] * (k as f64 / (n - k + 1) as f64) * ratio;
            }
        }
        Ok(Self {
            trials,
            survival_prob,
            pmf,
        })
    }

    pub fn trials(&self) -> u32 {
        self.trials
    }

    pub fn survival_prob(&self) -> f64 {
        self.survival_prob
    }

    /// `pmf[k]` = probability that exactly `k` of the `n` defects survive.
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }
}

/// Survival kernel for `n` defects with per-defect survival probability `q`.
pub fn binomial_kernel(n: u32, q: f64) -> Result<BinomialKernel> {
    BinomialKernel::new(n, q)
}
