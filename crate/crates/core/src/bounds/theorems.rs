//! Lower bounds on hypergeometric point masses and tails, each checked
//! against the exact value.
//!
//! All comparisons happen in log space: `slack = ln exact − ln bound`, and a
//! bound holds iff `slack ≥ 0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::hyper::{ln_pmf, ln_tail, HyperSpec, HyperTable};
use crate::error::{Error, Result};

/// `sqrt(π/320) · e^{-24}`, the constant of the hypergeometric tail bound.
pub fn eta() -> f64 {
    (PI / 320.0).sqrt() * (-24.0f64).exp()
}

/// `D(a‖b) = a ln(a/b) + (1−a) ln((1−a)/(1−b))` for `a, b ∈ (0, 1)`.
pub fn kl_div(a: f64, b: f64) -> Result<f64> {
    for v in [a, b] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::OutsideUnitInterval(v));
        }
    }
    Ok(a * (a / b).ln() + (1.0 - a) * ((1.0 - a) / (1.0 - b)).ln())
}

/// `2 y² / (a(1−a))`, valid as an upper bound on `D(a‖a+y)` for
/// `y ∈ [−a/2, (1−a)/2]`.
pub fn kl_quadratic_bound(a: f64, y: f64) -> f64 {
    2.0 * y * y / (a * (1.0 - a))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundStatus {
    Holds,
    Violated,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub spec: HyperSpec,
    pub exact_value: f64,
    pub bound_value: f64,
    /// `ln exact − ln bound`; `NaN` when the theorem does not apply.
    pub slack: f64,
    pub status: BoundStatus,
    /// Which precondition failed, for `NotApplicable`.
    pub reason: Option<String>,
}

impl BoundReport {
    pub fn holds(&self) -> bool {
        self.status == BoundStatus::Holds
    }

    pub fn applies(&self) -> bool {
        self.status != BoundStatus::NotApplicable
    }

    fn not_applicable(spec: HyperSpec, reason: impl Into<String>) -> Self {
        BoundReport {
            spec,
            exact_value: f64::NAN,
            bound_value: f64::NAN,
            slack: f64::NAN,
            status: BoundStatus::NotApplicable,
            reason: Some(reason.into()),
        }
    }

    fn compare(spec: HyperSpec, ln_exact: f64, ln_bound: f64) -> Self {
        let slack = ln_exact - ln_bound;
        BoundReport {
            spec,
            exact_value: ln_exact.exp(),
            bound_value: ln_bound.exp(),
            slack,
            status: if slack >= 0.0 { BoundStatus::Holds } else { BoundStatus::Violated },
            reason: None,
        }
    }
}

fn strict_interior(spec: &HyperSpec) -> Option<&'static str> {
    let (big_m, k, m, l) = (spec.population, spec.successes, spec.draws, spec.threshold);
    if l > m {
        return Some("l > m");
    }
    if l >= k {
        return Some("l >= K");
    }
    if m - l >= big_m - k {
        return Some("m - l >= M - K");
    }
    None
}

/// `ln` of the point-mass bound `sqrt(π/32) sqrt((1−x)/(m a(1−a))) e^{−F}`,
/// or the reason it does not apply.
pub fn ln_pointmass_bound(spec: &HyperSpec) -> std::result::Result<f64, String> {
    if let Some(reason) = strict_interior(spec) {
        return Err(reason.into());
    }
    if spec.threshold == 0 || spec.threshold == spec.draws {
        // a(1−a) = 0: the bound degenerates to +inf.
        return Err("a in {0, 1}".into());
    }
    let (a, b, x, m) = (spec.a(), spec.b(), spec.x(), spec.draws as f64);
    let d = kl_div(a, b).map_err(|e| e.to_string())?;
    let second = x / (1.0 - x) * (a - b).powi(2) / (2.0 * (b - a * x) * ((1.0 - b) - (1.0 - a) * x));
    let f = (d + second) * m;
    Ok(0.5 * (PI / 32.0).ln() + 0.5 * ((1.0 - x) / (m * a * (1.0 - a))).ln() - f)
}

pub fn ln_cor_c2_bound(spec: &HyperSpec) -> std::result::Result<f64, String> {
    let (l, m) = (spec.threshold, spec.draws);
    if l == 0 || l >= m {
        return Err("need 0 < l < m".into());
    }
    let (a, b, x) = (spec.a(), spec.b(), spec.x());
    if a > 2.0 * b {
        return Err("a > 2b".into());
    }
    if 1.0 - a > 2.0 * (1.0 - b) {
        return Err("1 - a > 2(1 - b)".into());
    }
    if x > 0.25 {
        return Err("x > 1/4".into());
    }
    let m = m as f64;
    Ok(0.5 * (PI / (64.0 * m * a * (1.0 - a))).ln() - 3.0 * (a - b).powi(2) / (b * (1.0 - b)) * m)
}

pub fn ln_first_tail_bound(spec: &HyperSpec) -> std::result::Result<f64, String> {
    if let Some(reason) = strict_interior(spec) {
        return Err(reason.into());
    }
    if spec.draws == 0 {
        return Err("m = 0".into());
    }
    let (a, b, x, m) = (spec.a(), spec.b(), spec.x(), spec.draws as f64);
    if a > 1.6 * b {
        return Err("a > 8b/5".into());
    }
    if 1.0 - a > 2.0 * (1.0 - b) {
        return Err("1 - a > 2(1 - b)".into());
    }
    if x > 0.25 {
        return Err("x > 1/4".into());
    }
    if m * a * (1.0 - a) < 4.0 {
        return Err("m a (1 - a) < 4".into());
    }
    Ok(eta().ln() - 6.0 * (a - b).powi(2) / (b * (1.0 - b)) * m)
}

fn report(spec: &HyperSpec, bound: std::result::Result<f64, String>, ln_exact: impl FnOnce() -> f64) -> BoundReport {
    match bound {
        Ok(ln_bound) => BoundReport::compare(*spec, ln_exact(), ln_bound),
        Err(reason) => BoundReport::not_applicable(*spec, reason),
    }
}

/// Point-mass lower bound on `Pr[X = l]`.
pub fn pointmass_lower_bound(spec: &HyperSpec) -> BoundReport {
    report(spec, ln_pointmass_bound(spec), || ln_pmf(spec))
}

/// Simplified point-mass bound `sqrt(π/(64 m a(1−a))) e^{−3(a−b)² m/(b(1−b))}`.
pub fn cor_c2(spec: &HyperSpec) -> BoundReport {
    report(spec, ln_cor_c2_bound(spec), || ln_pmf(spec))
}

/// Tail lower bound `Pr[X ≥ l] ≥ η e^{−6(a−b)² m/(b(1−b))}`.
pub fn tail_lower_bound(spec: &HyperSpec) -> BoundReport {
    report(spec, ln_first_tail_bound(spec), || ln_tail(spec))
}

/// Which statement of the sampling lemma to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplingPart {
    /// The `r`-th smallest sample is small, for `r ≤ ⌈βm⌉`.
    SmallSide,
    /// The `r`-th largest sample is large, for `r ≤ ⌈(1−β)m⌉`.
    LargeSide,
    /// Any sample position is not relevant.
    NotRelevant,
}

/// Number of ranks in `1..=n` that are small / large for `(k, eps)`, under
/// the same floating-point convention as [`crate::oracle::classify`].
pub fn class_counts(n: u64, k: u64, eps: f64) -> (u64, u64) {
    let width = n as f64 * eps;
    let small = (k as f64 - width).floor().clamp(0.0, n as f64) as u64;
    let not_large = (k as f64 + width).floor().clamp(0.0, n as f64) as u64;
    (small, n - not_large)
}

fn sampling_preconditions(n: u64, k: u64, eps: f64, m_draw: u64) -> Option<String> {
    let beta = k as f64 / n as f64;
    if m_draw == 0 || 4 * m_draw > n {
        return Some("need 0 < m <= n/4".into());
    }
    if m_draw as f64 * beta < 8.0 {
        return Some("m k/n < 8".into());
    }
    if beta > 0.5 || beta < 4.0 * eps {
        return Some("need 4 eps <= k/n <= 1/2".into());
    }
    None
}

/// Exact check of the without-replacement sampling lemma on population `n`.
///
/// The returned report carries the worst sample position (smallest slack)
/// in `spec.threshold`. For [`SamplingPart::NotRelevant`] `spec` describes
/// the small side.
pub fn sampling_lemma_part(n: u64, k: u64, eps: f64, m_draw: u64, part: SamplingPart) -> BoundReport {
    let (small, large) = class_counts(n, k, eps);
    let placeholder = HyperSpec { population: n, successes: small, draws: m_draw, threshold: 0 };
    if let Some(reason) = sampling_preconditions(n, k, eps, m_draw) {
        return BoundReport::not_applicable(placeholder, reason);
    }
    let beta = k as f64 / n as f64;
    let m = m_draw as f64;
    let small_table = HyperTable::new(n, small, m_draw);
    let large_table = HyperTable::new(n, large, m_draw);
    let tail = |t: &HyperTable, r: u64| t.ln_tail[r.min(m_draw) as usize];

    let one_sided = eta().ln() - 12.0 * eps * eps / (beta * (1.0 - beta)) * m;
    // Tails are monotone in r, so each one-sided part is tightest at its
    // largest admissible position.
    let (ln_bound, ln_exact, spec) = match part {
        SamplingPart::SmallSide => {
            let r = (beta * m).ceil() as u64;
            (one_sided, tail(&small_table, r), placeholder.with_threshold(r))
        }
        SamplingPart::LargeSide => {
            let r = ((1.0 - beta) * m).ceil() as u64;
            let spec = HyperSpec { successes: large, threshold: r, ..placeholder };
            (one_sided, tail(&large_table, r), spec)
        }
        SamplingPart::NotRelevant => {
            // Position r is not relevant iff at least r samples are small or
            // at least m + 1 − r are large; the two events are disjoint.
            let (ln_exact, r) = (1..=m_draw)
                .map(|r| (log_add(tail(&small_table, r), tail(&large_table, m_draw + 1 - r)), r))
                .min_by(|x, y| x.0.total_cmp(&y.0))
                .expect("m_draw >= 1");
            (eta().ln() - 24.0 / beta * eps * eps * m, ln_exact, placeholder.with_threshold(r))
        }
    };
    BoundReport::compare(spec, ln_exact, ln_bound)
}

fn log_add(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    if hi == f64::NEG_INFINITY {
        hi
    } else {
        hi + ((a - hi).exp() + (b - hi).exp()).ln()
    }
}

/// The corollary form: any sample position is non-relevant with probability
/// at least `η e^{−24 (n/k) ε² m}`.
pub fn sampling_lemma_check(n: u64, k: u64, eps: f64, m_draw: u64) -> BoundReport {
    sampling_lemma_part(n, k, eps, m_draw, SamplingPart::NotRelevant)
}

/// Chernoff forms `(e^{−δ²B/3}, e^{−δ²A/2})` for a sum with mean in `[A, B]`.
pub fn chernoff_bounds(lower_mean: f64, upper_mean: f64, delta: f64) -> Result<(f64, f64)> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::OutsideUnitInterval(delta));
    }
    Ok(((-delta * delta * upper_mean / 3.0).exp(), (-delta * delta * lower_mean / 2.0).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eta_value() {
        assert_relative_eq!(eta(), 3.7405e-12, max_relative = 1e-4);
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_div(0.3, 0.3).unwrap(), 0.0);
        let expected = 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        assert_relative_eq!(kl_div(0.5, 0.25).unwrap(), expected, max_relative = 1e-14);
        assert!(kl_div(0.0, 0.3).is_err());
        assert!(kl_div(0.3, 1.0).is_err());
        let d = kl_div(0.3, 0.2).unwrap();
        assert!(d <= kl_quadratic_bound(0.3, -0.1));
    }

    #[test]
    fn pointmass_middle_case() {
        let spec = HyperSpec::new(100, 50, 20, 10).unwrap();
        let r = pointmass_lower_bound(&spec);
        assert!(r.holds(), "{r:?}");
        assert!(r.exact_value > r.bound_value);
    }

    #[test]
    fn smallest_admissible_case() {
        // K = M − 1, m = 1, l = 0: m − l = 1 < M − K = 1 fails, so take K = M − 2.
        let spec = HyperSpec::new(10, 9, 1, 0).unwrap();
        assert!(!pointmass_lower_bound(&spec).applies());
        let spec = HyperSpec::new(10, 8, 1, 0).unwrap();
        let r = pointmass_lower_bound(&spec);
        assert_eq!(r.reason.as_deref(), Some("a in {0, 1}"));
    }

    #[test]
    fn preconditions_are_reported() {
        let spec = HyperSpec::new(100, 10, 50, 5).unwrap();
        let r = tail_lower_bound(&spec);
        assert_eq!(r.status, BoundStatus::NotApplicable);
        assert_eq!(r.reason.as_deref(), Some("x > 1/4"));
    }

    #[test]
    fn symmetric_tail_case() {
        let spec = HyperSpec::new(1000, 500, 200, 100).unwrap();
        let r = tail_lower_bound(&spec);
        assert!(r.holds());
        assert_relative_eq!(r.bound_value, eta(), max_relative = 1e-12);
        assert!(r.exact_value > 0.5);
    }

    #[test]
    fn sampling_example() {
        let r = sampling_lemma_check(800, 200, 0.0625, 40);
        assert!(r.holds(), "{r:?}");
        assert!(!sampling_lemma_check(800, 200, 0.1, 40).applies());
    }

    #[test]
    fn class_counts_agree_with_classify() {
        use crate::oracle::{classify, RankClass};
        for (n, k, eps) in [(800, 200, 0.0625), (1000, 333, 0.01), (10, 5, 0.25)] {
            let small = (1..=n).filter(|&r| classify(r, n, k, eps) == RankClass::Small).count() as u64;
            let large = (1..=n).filter(|&r| classify(r, n, k, eps) == RankClass::Large).count() as u64;
            assert_eq!(class_counts(n, k, eps), (small, large));
        }
    }

    #[test]
    fn chernoff_forms() {
        let (u, l) = chernoff_bounds(10.0, 10.0, 0.5).unwrap();
        assert_relative_eq!(u, (-10.0f64 / 12.0).exp());
        assert_relative_eq!(l, (-10.0f64 / 8.0).exp());
        let (u, l) = chernoff_bounds(1.0, 1.0, 1e-9).unwrap();
        assert!(u > 0.999_999 && l > 0.999_999);
        assert!(chernoff_bounds(1.0, 1.0, 1.0).is_err());
    }
}
