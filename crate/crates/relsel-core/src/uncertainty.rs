//! Operational-profile uncertainty sets and the inner worst-case
//! minimization `min_{p ∈ P} R(x, p)`.
//!
//! The objective is linear in `p` (coefficients `c_i = (1 - θ_i)^{x_i}`), so
//! every supported set admits an exact minimizer:
//!
//! * singleton — evaluate;
//! * finite — enumerate members;
//! * interval (componentwise box intersected with the simplex) — greedy
//!   exchange: start at the lower bounds and pour the remaining mass into
//!   components in increasing coefficient order, each up to its upper bound;
//! * ellipsoid `{ p₀ + Yζ : ‖ζ‖₂ ≤ ε }` with zero-column-sum `Y` — closed
//!   form `p* = p₀ - ε·Y(Yᵀc)/‖Yᵀc‖₂`.
//!
//! No LP solver dependency is needed at this scale.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result, Violation};
use crate::math;
use crate::model::{reliability_unchecked, OperationalProfile};

/// Feasibility tolerance for membership checks and worst-case results.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

/// The set `P` of operational profiles the tester considers possible.
#[derive(Debug, Clone, PartialEq)]
pub enum UncertaintySet {
    /// Exactly one known profile.
    Singleton(OperationalProfile),
    /// A finite list of candidate profiles.
    Finite(Vec<OperationalProfile>),
    /// Componentwise bounds `lower ≤ p ≤ upper` intersected with the simplex.
    Interval { lower: Vec<f64>, upper: Vec<f64> },
    /// `{ p₀ + Σ_ℓ ζ_ℓ y_ℓ : ‖ζ‖₂ ≤ radius, p ≥ 0 }`, where every direction
    /// `y_ℓ` sums to zero so perturbations stay on the simplex's affine hull.
    ///
    /// The quadratic form `{ p : (p-p₀)ᵀ Σ⁻¹ (p-p₀) ≤ radius² }` is the
    /// special case of any `Y` with `Y·Yᵀ = Σ`; this representation also
    /// admits rank-deficient perturbation structures.
    Ellipsoid {
        center: OperationalProfile,
        /// Perturbation directions (columns of the m×L matrix Y).
        directions: Vec<Vec<f64>>,
        radius: f64,
    },
}

impl UncertaintySet {
    /// Number of modules the set's profiles cover.
    pub fn dimension(&self) -> usize {
        match self {
            UncertaintySet::Singleton(p) => p.len(),
            UncertaintySet::Finite(members) => members.first().map_or(0, |p| p.len()),
            UncertaintySet::Interval { lower, .. } => lower.len(),
            UncertaintySet::Ellipsoid { center, .. } => center.len(),
        }
    }

    /// Check the per-kind invariants, collecting all violations.
    pub fn validate(&self) -> Result<()> {
        let mut violations = Vec::new();
        match self {
            UncertaintySet::Singleton(_) => {}
            UncertaintySet::Finite(members) => {
                if members.is_empty() {
                    violations.push(Violation::new("members", "finite set must be nonempty"));
                }
                let dim = self.dimension();
                for (i, member) in members.iter().enumerate() {
                    if member.len() != dim {
                        violations.push(Violation::new(
                            format!("members[{}]", i + 1),
                            "all members must share one dimension",
                        ));
                    }
                }
            }
            UncertaintySet::Interval { lower, upper } => {
                if lower.len() != upper.len() {
                    violations.push(Violation::new(
                        "p_hi",
                        format!(
                            "length {} does not match p_lo length {}",
                            upper.len(),
                            lower.len()
                        ),
                    ));
                } else {
                    for (i, (&lo, &hi)) in lower.iter().zip(upper).enumerate() {
                        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
                            violations.push(Violation::new(
                                format!("p_lo[{}]..p_hi[{}]", i + 1, i + 1),
                                format!("need 0 ≤ lo ≤ hi ≤ 1, got [{lo}, {hi}]"),
                            ));
                        }
                    }
                    let lo_sum: f64 = lower.iter().sum();
                    let hi_sum: f64 = upper.iter().sum();
                    if lo_sum > 1.0 + FEASIBILITY_TOLERANCE || hi_sum < 1.0 - FEASIBILITY_TOLERANCE
                    {
                        violations.push(Violation::new(
                            "p_lo/p_hi",
                            format!(
                                "box does not intersect the simplex (Σlo = {lo_sum}, Σhi = {hi_sum})"
                            ),
                        ));
                    }
                }
            }
            UncertaintySet::Ellipsoid {
                center,
                directions,
                radius,
            } => {
                if !(radius.is_finite() && *radius >= 0.0) {
                    violations.push(Violation::new(
                        "epsilon",
                        format!("radius must be nonnegative, got {radius}"),
                    ));
                }
                for (l, col) in directions.iter().enumerate() {
                    if col.len() != center.len() {
                        violations.push(Violation::new(
                            format!("Y[{}]", l + 1),
                            "direction length must match the center dimension",
                        ));
                        continue;
                    }
                    let sum: f64 = col.iter().sum();
                    if math::abs(sum) > 1e-12 {
                        violations.push(Violation::new(
                            format!("Y[{}]", l + 1),
                            format!("direction must sum to 0 within 1e-12, got {sum}"),
                        ));
                    }
                }
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(violations))
        }
    }
}

/// Which part of the set attained the worst case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Attainment {
    /// The singleton's only member.
    Singleton,
    /// 0-based index into the finite set's member list.
    FiniteMember(usize),
    /// A vertex of the box/simplex intersection; at most one component sits
    /// strictly between its bounds.
    IntervalVertex { balancing_component: Option<usize> },
    /// Boundary of the ellipsoid along the steepest descent direction.
    EllipsoidBoundary,
    /// The ellipsoid center (zero radius or objective constant over the set).
    EllipsoidCenter,
}

impl core::fmt::Display for Attainment {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Attainment::Singleton => write!(f, "singleton member"),
            Attainment::FiniteMember(i) => write!(f, "finite member {}", i + 1),
            Attainment::IntervalVertex {
                balancing_component: Some(i),
            } => write!(f, "box vertex (component {} balancing)", i + 1),
            Attainment::IntervalVertex {
                balancing_component: None,
            } => write!(f, "box vertex"),
            Attainment::EllipsoidBoundary => write!(f, "ellipsoid boundary"),
            Attainment::EllipsoidCenter => write!(f, "ellipsoid center"),
        }
    }
}

/// A minimizer of `R(x, ·)` over the set, its value, and what attained it.
#[derive(Debug, Clone, PartialEq)]
pub struct WorstCaseResult {
    pub profile: OperationalProfile,
    pub value: f64,
    pub active: Attainment,
}

/// Solve `min_{p ∈ P} Σ_i p_i (1 - θ_i)^{x_i}` exactly.
///
/// Ties between equal-valued candidates resolve to the lexicographically
/// smallest profile examined.
pub fn worst_case(
    defect_counts: &[u32],
    detection_prob: &[f64],
    set: &UncertaintySet,
) -> Result<WorstCaseResult> {
    if detection_prob.len() != defect_counts.len() {
        return Err(Error::DimensionMismatch {
            expected: defect_counts.len(),
            actual: detection_prob.len(),
        });
    }
    if set.dimension() != defect_counts.len() {
        return Err(Error::DimensionMismatch {
            expected: defect_counts.len(),
            actual: set.dimension(),
        });
    }
    set.validate()?;
    let coeff: Vec<f64> = defect_counts
        .iter()
        .zip(detection_prob)
        .map(|(&x, &th)| math::powi(1.0 - th, x))
        .collect();

    match set {
        UncertaintySet::Singleton(p) => Ok(WorstCaseResult {
            value: reliability_unchecked(defect_counts, p.probabilities(), detection_prob),
            profile: p.clone(),
            active: Attainment::Singleton,
        }),
        UncertaintySet::Finite(members) => {
            let mut best: Option<(usize, f64)> = None;
            for (i, member) in members.iter().enumerate() {
                let value =
                    reliability_unchecked(defect_counts, member.probabilities(), detection_prob);
                best = match best {
                    None => Some((i, value)),
                    Some((bi, bv)) => {
                        if value < bv
                            || (value == bv
                                && lex_less(member.probabilities(), members[bi].probabilities()))
                        {
                            Some((i, value))
                        } else {
                            Some((bi, bv))
                        }
                    }
                };
            }
            let (i, value) = best.expect("validated nonempty");
            Ok(WorstCaseResult {
                profile: members[i].clone(),
                value,
                active: Attainment::FiniteMember(i),
            })
        }
        UncertaintySet::Interval { lower, upper } => {
            let (probs, balancing) = greedy_box_simplex_min(&coeff, lower, upper)?;
            Ok(WorstCaseResult {
                value: reliability_unchecked(defect_counts, &probs, detection_prob),
                profile: OperationalProfile::from_computed(probs),
                active: Attainment::IntervalVertex {
                    balancing_component: balancing,
                },
            })
        }
        UncertaintySet::Ellipsoid {
            center,
            directions,
            radius,
        } => {
            let weights: Vec<f64> = directions
                .iter()
                .map(|col| col.iter().zip(&coeff).map(|(&y, &c)| y * c).sum())
                .collect();
            let norm = math::sqrt(weights.iter().map(|w| w * w).sum());
            let scale = *radius * norm;
            if scale == 0.0 {
                return Ok(WorstCaseResult {
                    value: reliability_unchecked(
                        defect_counts,
                        center.probabilities(),
                        detection_prob,
                    ),
                    profile: center.clone(),
                    active: Attainment::EllipsoidCenter,
                });
            }
            let mut probs = center.probabilities().to_vec();
            for (col, &w) in directions.iter().zip(&weights) {
                let step = *radius * w / norm;
                for (p, &y) in probs.iter_mut().zip(col) {
                    *p -= step * y;
                }
            }
            for (i, &p) in probs.iter().enumerate() {
                if p < -FEASIBILITY_TOLERANCE {
                    return Err(Error::UnsupportedGeometry {
                        component: i + 1,
                        value: p,
                    });
                }
            }
            for p in probs.iter_mut() {
                if *p < 0.0 {
                    *p = 0.0;
                }
            }
            Ok(WorstCaseResult {
                value: reliability_unchecked(defect_counts, &probs, detection_prob),
                profile: OperationalProfile::from_computed(probs),
                active: Attainment::EllipsoidBoundary,
            })
        }
    }
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// Exact linear minimization over `{ p : lo ≤ p ≤ hi, Σp = 1 }` by greedy
/// exchange. Returns the minimizer and the index of the one component (if
/// any) left strictly between its bounds.
fn greedy_box_simplex_min(
    coeff: &[f64],
    lower: &[f64],
    upper: &[f64],
) -> Result<(Vec<f64>, Option<usize>)> {
    let lo_sum: f64 = lower.iter().sum();
    let mut slack = 1.0 - lo_sum;
    if slack < -FEASIBILITY_TOLERANCE {
        return Err(Error::Infeasible(String::from(
            "lower bounds already exceed the simplex",
        )));
    }
    let mut probs = lower.to_vec();
    let mut order: Vec<usize> = (0..coeff.len()).collect();
    order.sort_by(|&a, &b| coeff[a].partial_cmp(&coeff[b]).unwrap().then(a.cmp(&b)));
    let mut balancing = None;
    for &i in &order {
        if slack <= 0.0 {
            break;
        }
        let room = upper[i] - lower[i];
        let add = if slack < room { slack } else { room };
        probs[i] += add;
        slack -= add;
        if add > 0.0 && add < room {
            balancing = Some(i);
        }
    }
    if slack > FEASIBILITY_TOLERANCE {
        return Err(Error::Infeasible(String::from(
            "upper bounds cannot absorb the simplex mass",
        )));
    }
    Ok((probs, balancing))
}

/// The two-endpoint reduction of an m = 2 interval set
/// `center_p1 - half_width ≤ p_1 ≤ center_p1 + half_width`:
/// for every state the worst case over the interval is attained at one of
/// `{(c-δ, 1-c+δ), (c+δ, 1-c-δ)}`.
pub fn interval_m2_reduce(center_p1: f64, half_width: f64) -> Result<UncertaintySet> {
    let mut violations = Vec::new();
    let lo = center_p1 - half_width;
    let hi = center_p1 + half_width;
    if half_width.is_nan() || half_width < 0.0 {
        violations.push(Violation::new(
            "delta",
            format!("half width must be nonnegative, got {half_width}"),
        ));
    }
    if lo.is_nan() || lo < 0.0 {
        violations.push(Violation::new(
            "p_hat1 - delta",
            format!("lower endpoint escapes [0, 1]: {lo}"),
        ));
    }
    if hi.is_nan() || hi > 1.0 {
        violations.push(Violation::new(
            "p_hat1 + delta",
            format!("upper endpoint escapes [0, 1]: {hi}"),
        ));
    }
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    Ok(UncertaintySet::Finite(alloc::vec![
        OperationalProfile::new(alloc::vec![lo, 1.0 - lo])?,
        OperationalProfile::new(alloc::vec![hi, 1.0 - hi])?,
    ]))
}

/// Membership test with tolerance. Returns `false` on dimension mismatch.
pub fn contains(set: &UncertaintySet, profile: &OperationalProfile, tol: f64) -> bool {
    if set.dimension() != profile.len() {
        return false;
    }
    let p = profile.probabilities();
    match set {
        UncertaintySet::Singleton(center) => max_abs_diff(p, center.probabilities()) <= tol,
        UncertaintySet::Finite(members) => members
            .iter()
            .any(|member| max_abs_diff(p, member.probabilities()) <= tol),
        UncertaintySet::Interval { lower, upper } => {
            let sum: f64 = p.iter().sum();
            math::abs(sum - 1.0) <= tol
                && p.iter()
                    .zip(lower.iter().zip(upper))
                    .all(|(&v, (&lo, &hi))| v >= lo - tol && v <= hi + tol)
        }
        UncertaintySet::Ellipsoid {
            center,
            directions,
            radius,
        } => {
            if p.iter().any(|&v| v < -tol) {
                return false;
            }
            let delta: Vec<f64> = p
                .iter()
                .zip(center.probabilities())
                .map(|(&a, &b)| a - b)
                .collect();
            match least_squares_coordinates(directions, &delta) {
                Some(zeta) => {
                    // Residual check: delta must lie in the span of Y.
                    let mut residual: f64 = 0.0;
                    for (i, &d) in delta.iter().enumerate() {
                        let fit: f64 = directions
                            .iter()
                            .zip(&zeta)
                            .map(|(col, &z)| col[i] * z)
                            .sum();
                        residual = residual.max(math::abs(fit - d));
                    }
                    let norm = math::sqrt(zeta.iter().map(|z| z * z).sum());
                    residual <= tol && norm <= radius + tol
                }
                None => false,
            }
        }
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| math::abs(x - y))
        .fold(0.0, f64::max)
}

/// Solve the normal equations `(YᵀY) ζ = Yᵀ delta` by Gaussian elimination
/// with partial pivoting. Near-zero pivots zero the corresponding
/// coordinate; the caller's residual check rejects bad fits.
fn least_squares_coordinates(directions: &[Vec<f64>], delta: &[f64]) -> Option<Vec<f64>> {
    let l = directions.len();
    if l == 0 {
        return if delta.iter().all(|&d| math::abs(d) == 0.0) {
            Some(Vec::new())
        } else {
            None
        };
    }
    let mut gram = alloc::vec![0.0f64; l * l];
    let mut rhs = alloc::vec![0.0f64; l];
    for a in 0..l {
        for b in 0..l {
            gram[a * l + b] = directions[a]
                .iter()
                .zip(&directions[b])
                .map(|(&x, &y)| x * y)
                .sum();
        }
        rhs[a] = directions[a].iter().zip(delta).map(|(&y, &d)| y * d).sum();
    }
    let scale = gram
        .iter()
        .map(|&g| math::abs(g))
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut perm: Vec<usize> = (0..l).collect();
    for col in 0..l {
        let (pivot_row, pivot_val) = (col..l)
            .map(|r| (r, math::abs(gram[perm[r] * l + col])))
            .fold((col, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if pivot_val <= 1e-14 * scale {
            // Dependent direction: leave its coordinate at zero.
            gram[perm[col] * l + col] = 0.0;
            continue;
        }
        perm.swap(col, pivot_row);
        let prow = perm[col];
        for &row in &perm[(col + 1)..] {
            let factor = gram[row * l + col] / gram[prow * l + col];
            if factor != 0.0 {
                for c in col..l {
                    gram[row * l + c] -= factor * gram[prow * l + c];
                }
                rhs[row] -= factor * rhs[prow];
            }
        }
    }
    let mut zeta = alloc::vec![0.0f64; l];
    for col in (0..l).rev() {
        let row = perm[col];
        let diag = gram[row * l + col];
        if diag == 0.0 {
            zeta[col] = 0.0;
            continue;
        }
        let mut acc = rhs[row];
        for c in (col + 1)..l {
            acc -= gram[row * l + c] * zeta[c];
        }
        zeta[col] = acc / diag;
    }
    Some(zeta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(p: &[f64]) -> OperationalProfile {
        OperationalProfile::new(p.to_vec()).unwrap()
    }

    fn example2_set() -> UncertaintySet {
        UncertaintySet::Finite(alloc::vec![profile(&[0.2, 0.8]), profile(&[0.8, 0.2])])
    }

    #[test]
    fn finite_set_matches_counterexample_values() {
        let theta = [0.3, 0.2];
        let set = example2_set();

        let r = worst_case(&[12, 19], &theta, &set).unwrap();
        assert!((r.value - 0.014).abs() < 5e-4, "got {}", r.value);
        assert_eq!(r.active, Attainment::FiniteMember(1));
        assert_eq!(r.profile.probabilities(), &[0.8, 0.2]);

        let r = worst_case(&[11, 19], &theta, &set).unwrap();
        assert!((r.value - 0.0155).abs() < 5e-4, "got {}", r.value);
        assert_eq!(r.profile.probabilities(), &[0.2, 0.8]);

        let r = worst_case(&[13, 19], &theta, &set).unwrap();
        assert!((r.value - 0.0106).abs() < 5e-4, "got {}", r.value);
    }

    #[test]
    fn singleton_is_plain_evaluation() {
        let theta = [0.3, 0.2];
        let set = UncertaintySet::Singleton(profile(&[0.4, 0.6]));
        let r = worst_case(&[3, 5], &theta, &set).unwrap();
        let direct =
            crate::model::reliability(&[3, 5], &profile(&[0.4, 0.6]), &theta).unwrap();
        assert_eq!(r.value, direct);
        assert_eq!(r.active, Attainment::Singleton);
    }

    #[test]
    fn interval_constant_objective_is_flat() {
        // c = (0.5, 0.5) is constant on the simplex, so any feasible p works.
        let set = UncertaintySet::Interval {
            lower: alloc::vec![0.3, 0.3],
            upper: alloc::vec![0.7, 0.7],
        };
        let r = worst_case(&[1, 1], &[0.5, 0.5], &set).unwrap();
        assert!((r.value - 0.5).abs() <= 1e-12);
        // Oracle: both endpoints of the p1 range give 0.5 too.
        for p1 in [0.3, 0.7] {
            let v = crate::model::reliability(&[1, 1], &profile(&[p1, 1.0 - p1]), &[0.5, 0.5])
                .unwrap();
            assert!((v - 0.5).abs() <= 1e-12);
        }
    }

    #[test]
    fn interval_greedy_three_modules() {
        let lower = alloc::vec![0.1, 0.2, 0.1];
        let upper = alloc::vec![0.5, 0.6, 0.4];
        let coeff = [0.3, 0.2, 0.5];
        let (probs, balancing) = greedy_box_simplex_min(&coeff, &lower, &upper).unwrap();
        for (got, want) in probs.iter().zip(&[0.3, 0.6, 0.1]) {
            assert!((got - want).abs() <= 1e-12, "{probs:?}");
        }
        assert_eq!(balancing, Some(0));
        // Exhaustive grid oracle over the feasible box.
        let value: f64 = probs.iter().zip(&coeff).map(|(&p, &c)| p * c).sum();
        let steps = 50;
        for a in 0..=steps {
            for b in 0..=steps {
                let p1 = a as f64 / steps as f64;
                let p2 = b as f64 / steps as f64;
                let p3 = 1.0 - p1 - p2;
                let feasible = (0.1..=0.5).contains(&p1)
                    && (0.2..=0.6).contains(&p2)
                    && (0.1 - 1e-12..=0.4 + 1e-12).contains(&p3);
                if feasible {
                    let v = p1 * coeff[0] + p2 * coeff[1] + p3 * coeff[2];
                    assert!(v >= value - 1e-9, "grid point beats greedy: {v} < {value}");
                }
            }
        }
    }

    #[test]
    fn interval_vertex_attainment() {
        // Non-trivial coefficients: all but at most one component at a bound.
        let set = UncertaintySet::Interval {
            lower: alloc::vec![0.1, 0.2, 0.1],
            upper: alloc::vec![0.5, 0.6, 0.4],
        };
        let r = worst_case(&[4, 1, 0], &[0.3, 0.3, 0.3], &set).unwrap();
        let probs = r.profile.probabilities();
        let at_bound = probs
            .iter()
            .zip([0.1, 0.2, 0.1].iter().zip(&[0.5, 0.6, 0.4]))
            .filter(|(&p, (&lo, &hi))| p == lo || p == hi)
            .count();
        assert!(at_bound >= probs.len() - 1, "{probs:?}");
        assert!(contains(&set, &r.profile, 1e-9));
    }

    #[test]
    fn interval_infeasible_box_is_rejected() {
        let set = UncertaintySet::Interval {
            lower: alloc::vec![0.6, 0.6],
            upper: alloc::vec![0.7, 0.7],
        };
        assert!(matches!(
            worst_case(&[1, 1], &[0.5, 0.5], &set),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn m2_reduction_examples() {
        let set = interval_m2_reduce(0.55, 0.07).unwrap();
        match &set {
            UncertaintySet::Finite(members) => {
                assert!((members[0].probabilities()[0] - 0.48).abs() <= 1e-12);
                assert!((members[0].probabilities()[1] - 0.52).abs() <= 1e-12);
                assert!((members[1].probabilities()[0] - 0.62).abs() <= 1e-12);
                assert!((members[1].probabilities()[1] - 0.38).abs() <= 1e-12);
            }
            other => panic!("expected finite set, got {other:?}"),
        }

        let set = interval_m2_reduce(0.2, 0.2).unwrap();
        match &set {
            UncertaintySet::Finite(members) => {
                assert_eq!(members[0].probabilities(), &[0.0, 1.0]);
                assert!((members[1].probabilities()[0] - 0.4).abs() <= 1e-12);
            }
            other => panic!("expected finite set, got {other:?}"),
        }

        // Zero width collapses to a repeated singleton.
        let set = interval_m2_reduce(0.5, 0.0).unwrap();
        match &set {
            UncertaintySet::Finite(members) => {
                assert_eq!(members[0], members[1]);
            }
            other => panic!("expected finite set, got {other:?}"),
        }

        assert!(interval_m2_reduce(0.1, 0.2).is_err());
        assert!(interval_m2_reduce(0.95, 0.1).is_err());
    }

    #[test]
    fn m2_reduction_equals_interval_on_grid() {
        let theta = [0.025, 0.04];
        let interval = UncertaintySet::Interval {
            lower: alloc::vec![0.48, 0.38],
            upper: alloc::vec![0.62, 0.52],
        };
        let reduced = interval_m2_reduce(0.55, 0.07).unwrap();
        for x1 in 0..=30u32 {
            for x2 in 0..=30u32 {
                let a = worst_case(&[x1, x2], &theta, &interval).unwrap().value;
                let b = worst_case(&[x1, x2], &theta, &reduced).unwrap().value;
                assert!(
                    (a - b).abs() <= 1e-12,
                    "x = ({x1}, {x2}): interval {a} vs reduction {b}"
                );
            }
        }
    }

    #[test]
    fn ellipsoid_closed_form_and_sampling_oracle() {
        let set = UncertaintySet::Ellipsoid {
            center: profile(&[0.5, 0.5]),
            directions: alloc::vec![alloc::vec![1.0, -1.0]],
            radius: 0.1,
        };
        // c = (0.25, 1.0): mass moves toward module 1.
        let r = worst_case(&[2, 0], &[0.5, 0.5], &set).unwrap();
        assert!((r.profile.probabilities()[0] - 0.6).abs() <= 1e-12);
        assert!((r.profile.probabilities()[1] - 0.4).abs() <= 1e-12);
        assert!((r.value - (0.25 * 0.6 + 1.0 * 0.4)).abs() <= 1e-12);
        assert_eq!(r.active, Attainment::EllipsoidBoundary);
        // Sampling oracle: no feasible zeta does better.
        for k in 0..=200 {
            let zeta = -0.1 + 0.2 * (k as f64 / 200.0);
            let p = [0.5 + zeta, 0.5 - zeta];
            let v = 0.25 * p[0] + 1.0 * p[1];
            assert!(v >= r.value - 1e-12);
        }
    }

    #[test]
    fn ellipsoid_center_when_objective_flat_or_zero_radius() {
        let set = UncertaintySet::Ellipsoid {
            center: profile(&[0.5, 0.5]),
            directions: alloc::vec![alloc::vec![1.0, -1.0]],
            radius: 0.1,
        };
        // Equal coefficients: Yᵀc = 0.
        let r = worst_case(&[1, 1], &[0.5, 0.5], &set).unwrap();
        assert_eq!(r.active, Attainment::EllipsoidCenter);
        assert_eq!(r.profile.probabilities(), &[0.5, 0.5]);

        let degenerate = UncertaintySet::Ellipsoid {
            center: profile(&[0.3, 0.7]),
            directions: alloc::vec![alloc::vec![1.0, -1.0]],
            radius: 0.0,
        };
        let r = worst_case(&[4, 1], &[0.2, 0.6], &degenerate).unwrap();
        let singleton = worst_case(
            &[4, 1],
            &[0.2, 0.6],
            &UncertaintySet::Singleton(profile(&[0.3, 0.7])),
        )
        .unwrap();
        assert_eq!(r.value, singleton.value);
        assert_eq!(r.profile, singleton.profile);
    }

    #[test]
    fn ellipsoid_negative_component_is_reported() {
        let set = UncertaintySet::Ellipsoid {
            center: profile(&[0.05, 0.95]),
            directions: alloc::vec![alloc::vec![1.0, -1.0]],
            radius: 0.1,
        };
        // c1 > c2 pushes p1 negative.
        match worst_case(&[0, 2], &[0.5, 0.5], &set) {
            Err(Error::UnsupportedGeometry { component, value }) => {
                assert_eq!(component, 1);
                assert!(value < 0.0);
            }
            other => panic!("expected unsupported geometry, got {other:?}"),
        }
    }

    #[test]
    fn contains_interval_and_ellipsoid() {
        let interval = UncertaintySet::Interval {
            lower: alloc::vec![0.48, 0.38],
            upper: alloc::vec![0.62, 0.52],
        };
        assert!(contains(&interval, &profile(&[0.5, 0.5]), 1e-9));
        assert!(!contains(&interval, &profile(&[0.7, 0.3]), 1e-9));

        let ellipsoid = UncertaintySet::Ellipsoid {
            center: profile(&[0.5, 0.5]),
            directions: alloc::vec![alloc::vec![1.0, -1.0]],
            radius: 0.1,
        };
        assert!(contains(&ellipsoid, &profile(&[0.58, 0.42]), 1e-9));
        assert!(!contains(&ellipsoid, &profile(&[0.65, 0.35]), 1e-9));
        // Dimension mismatch is false, not an error.
        assert!(!contains(&ellipsoid, &profile(&[1.0]), 1e-9));
    }

    #[test]
    fn monotone_under_set_inclusion() {
        let theta = [0.3, 0.2];
        let small = UncertaintySet::Finite(alloc::vec![profile(&[0.2, 0.8])]);
        let large = example2_set();
        for x1 in 0..8u32 {
            for x2 in 0..8u32 {
                let vs = worst_case(&[x1, x2], &theta, &small).unwrap().value;
                let vl = worst_case(&[x1, x2], &theta, &large).unwrap().value;
                assert!(vs >= vl - 1e-15);
            }
        }
    }

    #[test]
    fn finite_tie_breaks_lexicographically() {
        // Both members yield the same value when x = (0, 0).
        let set = UncertaintySet::Finite(alloc::vec![profile(&[0.8, 0.2]), profile(&[0.2, 0.8])]);
        let r = worst_case(&[0, 0], &[0.3, 0.2], &set).unwrap();
        assert_eq!(r.profile.probabilities(), &[0.2, 0.8]);
        assert_eq!(r.active, Attainment::FiniteMember(1));
    }
}
