//! Amplification to success probability `1 − Q`.
//!
//! `m = Θ(log 1/Q)` independent approximate selections form a sample whose
//! middle three quarters is all relevant with probability `1 − Q/2`. A
//! trial-and-error loop then picks sample positions at random until one
//! passes a majority-boosted "neither min nor max of four" test.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::approx_kselect::{KSelectPlan, KSelectRun};
use crate::approx_median::Constants;
use crate::error::{Error, Result};
use crate::oracle::{Comparator, Element};
use crate::primitives::{neither_min_nor_max_at, q_of, vote_constant};
use crate::scalar::Scalar;

/// `2^10 · 3^2`.
pub const SAMPLE_FACTOR: f64 = 9216.0;

/// `c_p` of the verification experiment viewed as a comparison that errs
/// with probability 15/32.
pub fn verification_vote_constant() -> u32 {
    vote_constant(&BigRational::from_ratio(15, 32))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopLevelConfig {
    pub q: f64,
    /// Sample size `⌈9216 ln(2/Q)⌉`.
    pub m: usize,
    /// `⌈ln(2/Q)⌉`.
    pub verify_t: u32,
    /// `2 · 544 · verify_t + 1` experiments per verification.
    pub verify_votes: u32,
    /// Rounds of the trial-and-error loop before giving up.
    pub round_cap: u32,
}

impl TopLevelConfig {
    pub fn new(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 0.5) {
            return Err(Error::FailureBudgetOutOfRange(q));
        }
        let ln = (2.0 / q).ln();
        let verify_t = ln.ceil() as u32;
        Ok(TopLevelConfig {
            q,
            m: (SAMPLE_FACTOR * ln).ceil() as usize,
            verify_t,
            verify_votes: 2 * verification_vote_constant() * verify_t + 1,
            round_cap: (64.0 * ln).ceil() as u32,
        })
    }

    /// Experiments that may accept while the verification still rejects.
    pub fn verify_losing_max(&self) -> u32 {
        self.verify_votes / 2
    }
}

/// `cfg.m` independent approximate selections of rank `k` from `items`.
pub fn sample_stage<O: Comparator>(oracle: &mut O, plan: &KSelectPlan, items: &[Element], cfg: &TopLevelConfig) -> Result<Vec<Element>> {
    (0..cfg.m).map(|_| plan.run(oracle, items).map(|r: KSelectRun| r.element)).collect()
}

/// Majority over `cfg.verify_votes` experiments: is the element at sample
/// position `position` neither the minimum nor the maximum of itself and
/// three distinct other positions drawn uniformly?
pub fn verify_candidate<O: Comparator>(oracle: &mut O, position: usize, sample: &[Element], cfg: &TopLevelConfig) -> bool {
    let accepted = (0..cfg.verify_votes).filter(|_| verification_experiment(oracle, position, sample)).count();
    accepted as u32 > cfg.verify_losing_max()
}

/// One experiment of [`verify_candidate`].
pub fn verification_experiment<O: Comparator>(oracle: &mut O, position: usize, sample: &[Element]) -> bool {
    let m = sample.len();
    assert!(m >= 4, "verification needs at least four sample positions");
    let others = distinct_others(oracle, position, m);
    neither_min_nor_max_at(oracle, (position, sample[position]), others.map(|j| (j, sample[j])))
}

/// Three distinct positions in `0..m`, all different from `skip`.
fn distinct_others<O: Comparator>(oracle: &mut O, skip: usize, m: usize) -> [usize; 3] {
    let mut picked = [usize::MAX; 3];
    let mut n = 0;
    while n < 3 {
        let mut j = oracle.rng().below(m as u64 - 1) as usize;
        if j >= skip {
            j += 1;
        }
        if !picked[..n].contains(&j) {
            picked[n] = j;
            n += 1;
        }
    }
    picked
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectOutcome {
    pub element: Element,
    /// Sample position of the returned element.
    pub position: usize,
    pub rounds: u32,
    pub exhausted: bool,
    pub sample_calls: u64,
    pub verify_calls: u64,
    pub sample: Vec<Element>,
}

impl SelectOutcome {
    pub fn calls(&self) -> u64 {
        self.sample_calls + self.verify_calls
    }
}

/// Runs the trial-and-error loop on an existing sample.
pub fn trial_and_error<O: Comparator>(oracle: &mut O, sample: &[Element], cfg: &TopLevelConfig) -> (usize, u32, bool) {
    let mut position = 0;
    for round in 1..=cfg.round_cap {
        position = oracle.rng().below(sample.len() as u64) as usize;
        if verify_candidate(oracle, position, sample, cfg) {
            return (position, round, false);
        }
    }
    (position, cfg.round_cap, true)
}

/// Approximate `k`-th smallest of `items` with failure probability `Q`.
///
/// `k` is taken in the working frame, so `1 ≤ k ≤ |items|/2`.
pub fn select_approx<O: Comparator>(
    oracle: &mut O,
    items: &[Element],
    k: u64,
    eps: f64,
    cfg: &TopLevelConfig,
    constants: Constants,
) -> Result<SelectOutcome> {
    let plan = KSelectPlan::new(items.len() as u64, k, eps, q_of(oracle.error_rate()), constants)?;
    select_approx_with(oracle, items, &plan, cfg)
}

pub fn select_approx_with<O: Comparator>(
    oracle: &mut O,
    items: &[Element],
    plan: &KSelectPlan,
    cfg: &TopLevelConfig,
) -> Result<SelectOutcome> {
    let start = oracle.calls();
    let sample = sample_stage(oracle, plan, items, cfg)?;
    let sample_calls = oracle.calls() - start;
    let (position, rounds, exhausted) = trial_and_error(oracle, &sample, cfg);
    Ok(SelectOutcome {
        element: sample[position],
        position,
        rounds,
        exhausted,
        sample_calls,
        verify_calls: oracle.calls() - start - sample_calls,
        sample,
    })
}
