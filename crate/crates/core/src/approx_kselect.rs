//! Constant-probability approximate k-th element with `O((k/n) ε⁻²)`
//! comparisons.
//!
//! Min-of-two purifying pushes the target's relative position `β_i` up
//! towards 1/8 while the relative window grows as `(3/2)^i ε`; the survivors
//! are then padded with dummy smallest elements so that the target sits at
//! the median, and handed to [`approx_median`](crate::approx_median).

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::approx_median::{approx_median, Constants, MedianRun};
use crate::error::{Error, Result};
use crate::oracle::{Comparator, Element};
use crate::primitives::{min_of_two, sel_exact};
use crate::scalar::{ceil_rational, exact_ge, powu, Scalar};

/// Failure budget of the exact selection inside [`approx_min_fallback`].
pub const FALLBACK_SELECTION_FAILURE: f64 = 1.0 / 36.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SelectLevel<T> {
    pub size: u64,
    pub eps: T,
    pub beta: T,
}

/// Level `i` has size `n_i`, window `ε_i` and relative target position `β_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectSchedule<T> {
    pub levels: Vec<SelectLevel<T>>,
    pub q: T,
    pub constants: Constants,
}

pub fn select_threshold<T: Scalar>() -> T {
    T::from_ratio(1, 8)
}

/// `β_i` from level `i − 1`:
/// `(2β − β² − ε²) − 2q(β − β² − ε²)`.
pub fn next_beta<T: Scalar>(beta: &T, eps: &T, q: &T) -> T {
    let b2 = beta.clone() * beta.clone();
    let e2 = eps.clone() * eps.clone();
    let two = T::from_ratio(2, 1);
    let base = two.clone() * beta.clone() - b2.clone() - e2.clone();
    let loss = beta.clone() - b2 - e2;
    base - two * q.clone() * loss
}

impl<T: Scalar> SelectSchedule<T> {
    /// Schedule for target `k` of `n` with window `eps` and min-of-two
    /// failure `q`. Empty (`L = 0`) unless `2 eps < k/n < 1/8`.
    pub fn new(n: u64, k: u64, eps: T, q: T, constants: Constants) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyPopulation);
        }
        if k == 0 || 2 * k > n {
            return Err(Error::RankOutOfRange { k, n });
        }
        if !(eps > T::zero() && eps < T::from_ratio(1, 2)) {
            return Err(Error::EpsilonOutOfRange(eps.to_f64()));
        }
        let beta = T::from_u64(k) / T::from_u64(n);
        let threshold = select_threshold::<T>();
        let mut levels = vec![SelectLevel { size: n, eps: eps.clone(), beta: beta.clone() }];
        let two_eps = T::from_ratio(2, 1) * eps.clone();
        if beta >= threshold || beta <= two_eps {
            return Ok(SelectSchedule { levels, q, constants });
        }
        let growth = T::from_ratio(3, 2);
        let shrink = BigRational::from_ratio(8, 9);
        let base = BigRational::from_integer(960.into()) * BigRational::from_ratio(k as i64, n as i64)
            * constants.factor_rational()
            / (eps.to_rational() * eps.to_rational());
        let mut i = 0u32;
        while levels[i as usize].beta < threshold {
            let prev = &levels[i as usize];
            let beta_i = next_beta(&prev.beta, &prev.eps, &q);
            i += 1;
            let eps_i = powu(&growth, i) * eps.clone();
            // ⌈960 · i · (8/9)^i · (k/n) · σ / ε²⌉, exactly.
            let size = &base * BigRational::from_integer(i.into()) * powu(&shrink, i);
            levels.push(SelectLevel { size: ceil_rational(&size).max(1), eps: eps_i, beta: beta_i });
            if i > 64 {
                return Err(Error::InvariantViolated { level: i as usize, what: "position does not grow".into() });
            }
        }
        let schedule = SelectSchedule { levels, q, constants };
        schedule.check()?;
        Ok(schedule)
    }

    pub fn rounds(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn last(&self) -> &SelectLevel<T> {
        &self.levels[self.rounds()]
    }

    /// Position and window invariants at every level:
    /// `β_i > 2ε_i` and `β_i ≤ 2^i β`.
    pub fn check(&self) -> Result<()> {
        let beta = &self.levels[0].beta;
        let two = T::from_ratio(2, 1);
        for (i, level) in self.levels.iter().enumerate() {
            let window = two.clone() * level.eps.clone();
            if exact_ge(&window, &level.beta) {
                return Err(Error::InvariantViolated {
                    level: i,
                    what: format!("beta {:?} not above twice eps {:?}", level.beta, level.eps),
                });
            }
            let cap = powu(&two, i as u32) * beta.clone();
            if !exact_ge(&cap, &level.beta) {
                return Err(Error::InvariantViolated {
                    level: i,
                    what: format!("beta {:?} above 2^i beta", level.beta),
                });
            }
        }
        if self.rounds() > 0 {
            let threshold = select_threshold::<T>();
            let last = self.rounds();
            if !exact_ge(&self.levels[last].beta, &threshold) || exact_ge(&self.levels[last - 1].beta, &threshold) {
                return Err(Error::InvariantViolated { level: last, what: "stopping level is not the first at 1/8".into() });
            }
        }
        Ok(())
    }

    /// Total oracle calls of the purifying rounds for vote constant `c_p`.
    pub fn purify_calls(&self, c_p: u32) -> u64 {
        let per_output = 6 * u64::from(c_p) + 1;
        self.levels[1..].iter().map(|l| l.size * per_output).sum()
    }
}

pub type SelectScheduleF64 = SelectSchedule<f64>;
pub type ExactSelectSchedule = SelectSchedule<BigRational>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SelectMode {
    /// `k ≤ n·eps`: any element of rank at most `k + n·eps` will do.
    ApproxMin,
    Purify,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalized {
    pub k: u64,
    pub eps: f64,
    pub mode: SelectMode,
}

/// Routes `k ≤ n eps` to the approximate-minimum fallback and halves `eps`
/// when `n eps < k ≤ 2 n eps`.
pub fn normalize_problem(n: u64, k: u64, eps: f64) -> Normalized {
    let width = n as f64 * eps;
    let kf = k as f64;
    if kf <= width {
        Normalized { k, eps, mode: SelectMode::ApproxMin }
    } else if kf <= 2.0 * width {
        Normalized { k, eps: eps / 2.0, mode: SelectMode::Purify }
    } else {
        Normalized { k, eps, mode: SelectMode::Purify }
    }
}

/// `target_size` boosted minima of two uniform draws from `source`.
pub fn purify_select_round<O: Comparator>(oracle: &mut O, source: &[Element], target_size: usize) -> Vec<Element> {
    if target_size == 0 {
        return Vec::new();
    }
    assert!(!source.is_empty(), "cannot draw from an empty multiset");
    let len = source.len() as u64;
    (0..target_size)
        .map(|_| {
            let rng = oracle.rng();
            let (a, b) = (rng.below(len), rng.below(len));
            min_of_two(oracle, source[a as usize], source[b as usize])
        })
        .collect()
}

/// `⌈3/eps⌉`.
pub fn fallback_sample_size(eps: f64) -> usize {
    ceil_rational(&(BigRational::from_integer(3.into()) / eps.to_rational())) as usize
}

/// Boosted minimum of `⌈3/eps⌉` uniform draws.
pub fn approx_min_fallback<O: Comparator>(oracle: &mut O, items: &[Element], eps: f64) -> Result<Element> {
    if items.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::EpsilonOutOfRange(eps));
    }
    let m = fallback_sample_size(eps);
    let len = items.len() as u64;
    let sample: Vec<Element> = (0..m).map(|_| items[oracle.rng().below(len) as usize]).collect();
    Ok(sel_exact(oracle, &sample, 1, FALLBACK_SELECTION_FAILURE)?.element)
}

/// `round(x)` with halves rounded up.
fn round_half_up(x: f64) -> u64 {
    (x + 0.5).floor() as u64
}

/// How the final median call was set up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Padding {
    pub target: u64,
    pub dummies: u64,
    pub median_eps: f64,
}

/// Dummy count and median window for a final level of size `n_l` with
/// relative position `beta_l` and window `eps_l`.
///
/// With `k_L = round(β_L n_L)` and `d = n_L − 2 k_L`, the target is exactly the
/// median of the padded multiset. The window shrinks by one position to absorb
/// the rounding of `k_L`; if that leaves nothing, half the window is kept.
pub fn padding(n_l: u64, beta_l: f64, eps_l: f64) -> Padding {
    let target = round_half_up(beta_l * n_l as f64).min(n_l / 2);
    let dummies = n_l - 2 * target;
    let total = (n_l + dummies) as f64;
    let relative = n_l as f64 * eps_l / total;
    let mut median_eps = relative - 1.0 / total;
    if median_eps <= 0.0 {
        median_eps = relative / 2.0;
    }
    Padding { target, dummies, median_eps: median_eps.min(0.499_999) }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KSelectRun {
    pub element: Element,
    pub mode: SelectMode,
    pub round_calls: Vec<u64>,
    pub padding: Option<Padding>,
    pub median: Option<MedianRun>,
    pub fallback_calls: u64,
}

impl KSelectRun {
    pub fn calls(&self) -> u64 {
        self.round_calls.iter().sum::<u64>() + self.median.as_ref().map_or(0, MedianRun::calls) + self.fallback_calls
    }
}

/// Approximate `k`-th smallest of `items` (`1 ≤ k ≤ |items|/2`).
pub fn approx_kselect<O: Comparator>(
    oracle: &mut O,
    items: &[Element],
    k: u64,
    eps: f64,
    constants: Constants,
) -> Result<KSelectRun> {
    let n = items.len() as u64;
    if n == 0 {
        return Err(Error::EmptyPopulation);
    }
    let q = crate::primitives::q_of(oracle.error_rate());
    let plan = KSelectPlan::new(n, k, eps, q, constants)?;
    plan.run(oracle, items)
}

/// Everything about a run that does not depend on the coins.
#[derive(Debug, Clone, PartialEq)]
pub struct KSelectPlan {
    pub normalized: Normalized,
    pub schedule: Option<SelectScheduleF64>,
    pub padding: Option<Padding>,
}

impl KSelectPlan {
    pub fn new(n: u64, k: u64, eps: f64, q: f64, constants: Constants) -> Result<Self> {
        if k == 0 || 2 * k > n {
            return Err(Error::RankOutOfRange { k, n });
        }
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::EpsilonOutOfRange(eps));
        }
        let normalized = normalize_problem(n, k, eps);
        if normalized.mode == SelectMode::ApproxMin {
            return Ok(KSelectPlan { normalized, schedule: None, padding: None });
        }
        let schedule = SelectSchedule::new(n, k, normalized.eps, q, constants)?;
        let last = schedule.last();
        let padding = padding(last.size, last.beta, last.eps);
        Ok(KSelectPlan { normalized, schedule: Some(schedule), padding: Some(padding) })
    }

    pub fn run<O: Comparator>(&self, oracle: &mut O, items: &[Element]) -> Result<KSelectRun> {
        let (Some(schedule), Some(padding)) = (&self.schedule, self.padding) else {
            let before = oracle.calls();
            let element = approx_min_fallback(oracle, items, self.normalized.eps)?;
            return Ok(KSelectRun {
                element,
                mode: SelectMode::ApproxMin,
                round_calls: Vec::new(),
                padding: None,
                median: None,
                fallback_calls: oracle.calls() - before,
            });
        };
        let constants = schedule.constants;
        let mut round_calls = Vec::with_capacity(schedule.rounds());
        let mut pool: Option<Vec<Element>> = None;
        for level in &schedule.levels[1..] {
            let before = oracle.calls();
            let next = purify_select_round(oracle, pool.as_deref().unwrap_or(items), level.size as usize);
            round_calls.push(oracle.calls() - before);
            pool = Some(next);
        }
        let padded: Vec<Element>;
        let median_items = if padding.dummies == 0 {
            pool.as_deref().unwrap_or(items)
        } else {
            let mut v = pool.unwrap_or_else(|| items.to_vec());
            v.extend((0..padding.dummies).map(|j| Element::dummy(j as u32)));
            padded = v;
            &padded
        };
        let median = approx_median(oracle, median_items, padding.median_eps, constants)?;
        Ok(KSelectRun {
            element: median.element,
            mode: SelectMode::Purify,
            round_calls,
            padding: Some(padding),
            median: Some(median),
            fallback_calls: 0,
        })
    }
}
