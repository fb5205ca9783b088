//! Hypergeometric law in log space.

use serde::{Deserialize, Serialize};

use super::special::{ln_choose, log_sum_exp, LnFactorial};
use crate::error::{Error, Result};

/// `X ~ Hyper(M, K, m)`: black balls among `m` draws without replacement from
/// `M` balls of which `K` are black, queried at threshold `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperSpec {
    pub population: u64,
    pub successes: u64,
    pub draws: u64,
    pub threshold: u64,
}

impl HyperSpec {
    pub fn new(population: u64, successes: u64, draws: u64, threshold: u64) -> Result<Self> {
        if population == 0 {
            return Err(Error::InvalidHyper("empty population".into()));
        }
        if successes > population || draws > population {
            return Err(Error::InvalidHyper(format!(
                "K={successes} and m={draws} must not exceed M={population}"
            )));
        }
        Ok(HyperSpec { population, successes, draws, threshold })
    }

    pub fn with_threshold(&self, threshold: u64) -> Self {
        HyperSpec { threshold, ..*self }
    }

    /// Smallest value in the support.
    pub fn support_min(&self) -> u64 {
        (self.draws + self.successes).saturating_sub(self.population)
    }

    pub fn support_max(&self) -> u64 {
        self.draws.min(self.successes)
    }

    /// `a = l / m` (0 when `m = 0`).
    pub fn a(&self) -> f64 {
        if self.draws == 0 {
            0.0
        } else {
            self.threshold as f64 / self.draws as f64
        }
    }

    /// `b = K / M`.
    pub fn b(&self) -> f64 {
        self.successes as f64 / self.population as f64
    }

    /// `x = m / M`.
    pub fn x(&self) -> f64 {
        self.draws as f64 / self.population as f64
    }

    pub fn mean(&self) -> f64 {
        self.draws as f64 * self.b()
    }
}

/// `ln Pr[X = l]`, `-inf` outside the support.
pub fn ln_pmf(spec: &HyperSpec) -> f64 {
    let l = spec.threshold;
    if l < spec.support_min() || l > spec.support_max() {
        return f64::NEG_INFINITY;
    }
    ln_choose(spec.successes, l) + ln_choose(spec.population - spec.successes, spec.draws - l)
        - ln_choose(spec.population, spec.draws)
}

pub fn pmf(spec: &HyperSpec) -> f64 {
    ln_pmf(spec).exp()
}

/// `ln Pr[X ≥ l]`, summing whichever tail is lighter.
pub fn ln_tail(spec: &HyperSpec) -> f64 {
    let (lo, hi) = (spec.support_min(), spec.support_max());
    let l = spec.threshold;
    if l <= lo {
        return 0.0;
    }
    if l > hi {
        return f64::NEG_INFINITY;
    }
    let terms = |from: u64, to: u64| -> Vec<f64> {
        (from..=to).map(|j| ln_pmf(&spec.with_threshold(j))).collect()
    };
    if l as f64 > spec.mean() {
        log_sum_exp(&terms(l, hi))
    } else {
        let below = log_sum_exp(&terms(lo, l - 1)).exp();
        (-below).ln_1p()
    }
}

pub fn tail(spec: &HyperSpec) -> f64 {
    ln_tail(spec).exp()
}

/// `ln Pr[X = j]` and `ln Pr[X ≥ j]` for every `j` in `0..=m`, in one pass.
///
/// Entries outside the support are `-inf` (pmf) or `0`/`-inf` (tail).
#[derive(Debug, Clone)]
pub struct HyperTable {
    pub ln_pmf: Vec<f64>,
    pub ln_tail: Vec<f64>,
}

impl HyperTable {
    pub fn new(population: u64, successes: u64, draws: u64) -> Self {
        let base = HyperSpec { population, successes, draws, threshold: 0 };
        let ln_pmf: Vec<f64> = (0..=draws).map(|j| ln_pmf(&base.with_threshold(j))).collect();
        Self::from_ln_pmf(&base, ln_pmf)
    }

    /// Same as [`HyperTable::new`] with `ln n!` looked up instead of recomputed.
    pub fn with_factorials(population: u64, successes: u64, draws: u64, lnf: &LnFactorial) -> Self {
        let base = HyperSpec { population, successes, draws, threshold: 0 };
        let (lo, hi) = (base.support_min(), base.support_max());
        let denom = lnf.ln_choose(population, draws);
        let ln_pmf = (0..=draws)
            .map(|j| {
                if j < lo || j > hi {
                    f64::NEG_INFINITY
                } else {
                    lnf.ln_choose(successes, j) + lnf.ln_choose(population - successes, draws - j) - denom
                }
            })
            .collect();
        Self::from_ln_pmf(&base, ln_pmf)
    }

    fn from_ln_pmf(base: &HyperSpec, ln_pmf: Vec<f64>) -> Self {
        let m = base.draws as usize;
        let mean = base.mean();
        let max = ln_pmf.iter().copied().fold(f64::NEG_INFINITY, f64::max);

        // Upper tail accumulated in log space so it never underflows; lower
        // tail as the complement of a prefix sum, which stays near 1 there.
        let mut ln_tail = vec![f64::NEG_INFINITY; m + 1];
        let mut acc = f64::NEG_INFINITY;
        for j in (0..=m).rev() {
            acc = log_add_exp(acc, ln_pmf[j]);
            ln_tail[j] = acc;
        }
        let total: f64 = ln_pmf.iter().map(|v| (v - max).exp()).sum();
        let mut below = 0.0;
        for j in 0..=m {
            if (j as f64) <= mean {
                ln_tail[j] = (-(below / total)).ln_1p();
            } else {
                ln_tail[j] -= max + total.ln();
            }
            below += (ln_pmf[j] - max).exp();
        }
        HyperTable { ln_pmf, ln_tail }
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}
