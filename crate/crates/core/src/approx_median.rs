//! Constant-probability approximate median with `O(ε⁻²)` comparisons.
//!
//! Each purifying round builds a multiset `M_i` of `n_i` medians-of-three of
//! uniform draws from `M_{i−1}`, widening the relative window from `ε_{i−1}`
//! to `ε_i = (5/4)^i ε`. Once the window reaches 1/6 a sampled exact median
//! finishes the job.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{Comparator, Element};
use crate::primitives::{median_of_three, sel_exact};
use crate::scalar::{ceil_rational, exact_ge, powu, Scalar};

/// Failure budget of the exact selection inside [`sm_baseline`].
pub const SM_SELECTION_FAILURE: f64 = 1.0 / 72.0;

/// Leading-constant mode of the purifying schedules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Constants {
    Paper,
    /// Sizes multiplied by `σ ∈ (0, 1]`; no longer carries the proven
    /// failure bounds.
    Scaled(f64),
}

impl Constants {
    pub fn scaled(sigma: f64) -> Result<Self> {
        if sigma > 0.0 && sigma <= 1.0 {
            Ok(Constants::Scaled(sigma))
        } else {
            Err(Error::ScaleOutOfRange(sigma))
        }
    }

    pub fn factor(&self) -> f64 {
        match *self {
            Constants::Paper => 1.0,
            Constants::Scaled(sigma) => sigma,
        }
    }

    pub(crate) fn factor_rational(&self) -> BigRational {
        self.factor().to_rational()
    }
}

impl std::fmt::Display for Constants {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Constants::Paper => write!(f, "paper"),
            Constants::Scaled(sigma) => write!(f, "scaled:{sigma}"),
        }
    }
}

impl std::str::FromStr for Constants {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Constants::Paper),
            other => {
                let sigma = other
                    .strip_prefix("scaled:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or(Error::ScaleOutOfRange(f64::NAN))?;
                Constants::scaled(sigma)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MedianLevel<T> {
    pub size: u64,
    pub eps: T,
}

/// Level `i` has size `n_i` and relative window `ε_i`; level 0 is the input.
#[derive(Debug, Clone, PartialEq)]
pub struct MedianSchedule<T> {
    pub levels: Vec<MedianLevel<T>>,
    pub constants: Constants,
}

/// Window size at which purifying stops.
pub fn median_threshold<T: Scalar>() -> T {
    T::from_ratio(1, 6)
}

fn check_eps<T: Scalar>(eps: &T) -> Result<()> {
    if *eps > T::zero() && *eps < T::from_ratio(1, 2) {
        Ok(())
    } else {
        Err(Error::EpsilonOutOfRange(eps.to_f64()))
    }
}

impl<T: Scalar> MedianSchedule<T> {
    pub fn new(n: u64, eps: T, constants: Constants) -> Result<Self> {
        check_eps(&eps)?;
        if n == 0 {
            return Err(Error::EmptyPopulation);
        }
        let threshold = median_threshold::<T>();
        let growth = T::from_ratio(5, 4);
        let eps_rational = eps.to_rational();
        let sigma = constants.factor_rational();
        let mut levels = vec![MedianLevel { size: n, eps: eps.clone() }];
        let mut i = 0u32;
        while levels[i as usize].eps < threshold {
            i += 1;
            let eps_i = powu(&growth, i) * eps.clone();
            // ⌈2000 · i · (16/25)^i · σ / ε²⌉, exactly.
            let shrink = BigRational::from_ratio(16, 25);
            let size = BigRational::from_integer((2000 * i64::from(i)).into()) * powu(&shrink, i) * &sigma
                / (&eps_rational * &eps_rational);
            levels.push(MedianLevel { size: ceil_rational(&size).max(1), eps: eps_i });
        }
        Ok(MedianSchedule { levels, constants })
    }

    /// Number of purifying rounds `L`.
    pub fn rounds(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn final_eps(&self) -> &T {
        &self.levels[self.rounds()].eps
    }

    /// Total oracle calls of the purifying rounds for vote constant `c_p`.
    pub fn purify_calls(&self, c_p: u32) -> u64 {
        let per_output = 3 * (8 * u64::from(c_p) + 1);
        self.levels[1..].iter().map(|l| l.size * per_output).sum()
    }

    /// Checks the defining invariants; used by tests and sweeps.
    pub fn check(&self) -> Result<()> {
        let threshold = median_threshold::<T>();
        let last = self.rounds();
        for (i, w) in self.levels.windows(2).enumerate() {
            if w[1].eps <= w[0].eps {
                return Err(Error::InvariantViolated { level: i + 1, what: "window not increasing".into() });
            }
        }
        if !exact_ge(&self.levels[last].eps, &threshold) {
            return Err(Error::InvariantViolated { level: last, what: "final window below 1/6".into() });
        }
        if last > 0 && exact_ge(&self.levels[last - 1].eps, &threshold) {
            return Err(Error::InvariantViolated { level: last - 1, what: "stopped late".into() });
        }
        Ok(())
    }
}

pub type MedianScheduleF64 = MedianSchedule<f64>;
pub type ExactMedianSchedule = MedianSchedule<BigRational>;

/// `n_i` medians-of-three of uniform draws (with replacement) from `source`.
pub fn purify_median_round<O: Comparator>(oracle: &mut O, source: &[Element], target_size: usize) -> Vec<Element> {
    if target_size == 0 {
        return Vec::new();
    }
    assert!(!source.is_empty(), "cannot draw from an empty multiset");
    let len = source.len() as u64;
    (0..target_size)
        .map(|_| {
            let rng = oracle.rng();
            let (a, b, c) = (rng.below(len), rng.below(len), rng.below(len));
            median_of_three(oracle, source[a as usize], source[b as usize], source[c as usize])
        })
        .collect()
}

/// Smallest odd integer `≥ 2.5 ε⁻²`.
pub fn sm_sample_size(eps: f64) -> usize {
    let e = eps.to_rational();
    let m = ceil_rational(&(BigRational::from_ratio(5, 2) / (&e * &e))) as usize;
    m | 1
}

/// Sampled median: `sm_sample_size(eps)` uniform draws, then their boosted
/// exact median with failure at most 1/72.
pub fn sm_baseline<O: Comparator>(oracle: &mut O, items: &[Element], eps: f64) -> Result<Element> {
    if items.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    check_eps(&eps)?;
    let m = sm_sample_size(eps);
    let len = items.len() as u64;
    let sample: Vec<Element> = (0..m).map(|_| items[oracle.rng().below(len) as usize]).collect();
    Ok(sel_exact(oracle, &sample, m.div_ceil(2), SM_SELECTION_FAILURE)?.element)
}

/// Outcome of [`approx_median`] with its cost split by stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MedianRun {
    pub element: Element,
    /// Calls charged by each purifying round.
    pub round_calls: Vec<u64>,
    pub sm_calls: u64,
}

impl MedianRun {
    pub fn calls(&self) -> u64 {
        self.round_calls.iter().sum::<u64>() + self.sm_calls
    }
}

/// Approximate median of `items` (a multiset): runs the schedule's rounds,
/// then [`sm_baseline`] at the final window.
pub fn approx_median_with<O: Comparator, T: Scalar>(
    oracle: &mut O,
    items: &[Element],
    schedule: &MedianSchedule<T>,
) -> Result<MedianRun> {
    if items.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let mut round_calls = Vec::with_capacity(schedule.rounds());
    let mut pool: Option<Vec<Element>> = None;
    for level in &schedule.levels[1..] {
        let before = oracle.calls();
        let next = purify_median_round(oracle, pool.as_deref().unwrap_or(items), level.size as usize);
        round_calls.push(oracle.calls() - before);
        pool = Some(next);
    }
    let before = oracle.calls();
    let eps = schedule.final_eps().to_f64().min(0.499_999);
    let element = sm_baseline(oracle, pool.as_deref().unwrap_or(items), eps)?;
    let sm_calls = oracle.calls() - before;
    Ok(MedianRun { element, round_calls, sm_calls })
}

pub fn approx_median<O: Comparator>(oracle: &mut O, items: &[Element], eps: f64, constants: Constants) -> Result<MedianRun> {
    let schedule = MedianSchedule::new(items.len() as u64, eps, constants)?;
    approx_median_with(oracle, items, &schedule)
}
