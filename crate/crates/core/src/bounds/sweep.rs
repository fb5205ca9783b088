//! Exhaustive grids for the hypergeometric bounds.
//!
//! A sweep is organised in columns: one column is a fixed `(M, K)` and every
//! admissible `(m, l)` below it. Columns are independent, so callers can
//! evaluate them in parallel and [`SweepTally::merge`] the results.

use serde::{Deserialize, Serialize};

use super::hyper::{HyperSpec, HyperTable};
use super::special::LnFactorial;
use super::theorems::{ln_cor_c2_bound, ln_first_tail_bound, ln_pointmass_bound, sampling_lemma_part, SamplingPart};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Theorem {
    PointMass,
    CorC2,
    FirstTail,
}

impl Theorem {
    pub const ALL: [Theorem; 3] = [Theorem::PointMass, Theorem::CorC2, Theorem::FirstTail];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::PointMass => "pointmass",
            Theorem::CorC2 => "pointmass_simplified",
            Theorem::FirstTail => "tail",
        }
    }
}

/// One CSV row: `M,K,m,l,a,b,x,exact,bound,holds,slack`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "M")]
    pub population: u64,
    #[serde(rename = "K")]
    pub successes: u64,
    #[serde(rename = "m")]
    pub draws: u64,
    #[serde(rename = "l")]
    pub threshold: u64,
    pub a: f64,
    pub b: f64,
    pub x: f64,
    pub exact: f64,
    pub bound: f64,
    pub holds: bool,
    pub slack: f64,
}

impl SweepRow {
    fn new(spec: &HyperSpec, ln_exact: f64, ln_bound: f64) -> Self {
        let slack = ln_exact - ln_bound;
        SweepRow {
            population: spec.population,
            successes: spec.successes,
            draws: spec.draws,
            threshold: spec.threshold,
            a: spec.a(),
            b: spec.b(),
            x: spec.x(),
            exact: ln_exact.exp(),
            bound: ln_bound.exp(),
            holds: slack >= 0.0,
            slack,
        }
    }
}

/// Counts for one theorem over part of a grid, plus its tightest case.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepTally {
    pub checked: u64,
    pub not_applicable: u64,
    pub violations: u64,
    pub tightest: Option<SweepRow>,
    /// Every violating row (expected empty).
    pub counterexamples: Vec<SweepRow>,
}

impl SweepTally {
    fn record(&mut self, row: SweepRow) {
        self.checked += 1;
        if !row.holds {
            self.violations += 1;
            self.counterexamples.push(row.clone());
        }
        if self.tightest.as_ref().is_none_or(|t| row.slack < t.slack) {
            self.tightest = Some(row);
        }
    }

    pub fn merge(mut self, other: SweepTally) -> SweepTally {
        self.checked += other.checked;
        self.not_applicable += other.not_applicable;
        self.violations += other.violations;
        self.counterexamples.extend(other.counterexamples);
        if let Some(row) = other.tightest {
            if self.tightest.as_ref().is_none_or(|t| row.slack < t.slack) {
                self.tightest = Some(row);
            }
        }
        self
    }
}

/// Largest draw count swept for population `M`: all of them up to 1000,
/// then only `m ≤ M/4`, the region the simplified bounds speak about.
pub fn max_draws(population: u64) -> u64 {
    if population <= 1000 {
        population
    } else {
        population / 4
    }
}

/// Evaluates every theorem on every `(m, l)` of column `(M, K)`.
pub fn sweep_column(population: u64, successes: u64, lnf: &LnFactorial) -> [SweepTally; 3] {
    let mut tallies: [SweepTally; 3] = Default::default();
    for draws in 1..=max_draws(population) {
        let table = HyperTable::with_factorials(population, successes, draws, lnf);
        let base = HyperSpec { population, successes, draws, threshold: 0 };
        for l in 0..=draws {
            let spec = base.with_threshold(l);
            for (slot, theorem) in Theorem::ALL.iter().enumerate() {
                let (bound, exact) = match theorem {
                    Theorem::PointMass => (ln_pointmass_bound(&spec), table.ln_pmf[l as usize]),
                    Theorem::CorC2 => (ln_cor_c2_bound(&spec), table.ln_pmf[l as usize]),
                    Theorem::FirstTail => (ln_first_tail_bound(&spec), table.ln_tail[l as usize]),
                };
                match bound {
                    Ok(ln_bound) => tallies[slot].record(SweepRow::new(&spec, exact, ln_bound)),
                    Err(_) => tallies[slot].not_applicable += 1,
                }
            }
        }
    }
    tallies
}

/// One admissible instance of the sampling corollary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingCase {
    pub n: u64,
    pub k: u64,
    pub eps: f64,
    pub m_draw: u64,
}

/// Populations `n ∈ {200, 400, …} ≤ max_n`, `k/n` on a 1/40 grid, `eps`
/// dyadic with `4 eps ≤ k/n`, and every `m` with `8 n/k ≤ m ≤ n/4`, stepping
/// so each `(n, k, eps)` gets at most 64 draw counts.
pub fn sampling_grid(max_n: u64) -> Vec<SamplingCase> {
    let mut cases = Vec::new();
    let eps_grid = [0.003125, 0.00625, 0.0125, 0.025, 0.05, 0.1, 0.125];
    let mut n = 200;
    while n <= max_n {
        for step in 1..=20 {
            let k = n * step / 40;
            let beta = k as f64 / n as f64;
            for &eps in eps_grid.iter().filter(|&&e| 4.0 * e <= beta) {
                let lo = (8.0 / beta).ceil() as u64;
                let hi = n / 4;
                if lo > hi {
                    continue;
                }
                let stride = ((hi - lo) / 64).max(1);
                let mut m = lo;
                while m <= hi {
                    cases.push(SamplingCase { n, k, eps, m_draw: m });
                    m += stride;
                }
            }
        }
        n += 200;
    }
    cases
}

/// Tallies for the two one-sided parts and the corollary on one case.
pub fn sampling_case(case: &SamplingCase) -> [SweepTally; 3] {
    let parts = [SamplingPart::SmallSide, SamplingPart::LargeSide, SamplingPart::NotRelevant];
    parts.map(|part| {
        let mut tally = SweepTally::default();
        let report = sampling_lemma_part(case.n, case.k, case.eps, case.m_draw, part);
        if report.applies() {
            let ln_exact = report.exact_value.ln();
            let ln_bound = ln_exact - report.slack;
            let mut row = SweepRow::new(&report.spec, ln_exact, ln_bound);
            // Keep the exact log slack; exp/ln above can lose the last bits.
            row.slack = report.slack;
            row.holds = report.holds();
            tally.record(row);
        } else {
            tally.not_applicable += 1;
        }
        tally
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_population_has_no_counterexamples() {
        let lnf = LnFactorial::new(120);
        let mut totals: [SweepTally; 3] = Default::default();
        for k in 0..=120 {
            let col = sweep_column(120, k, &lnf);
            totals = [0, 1, 2].map(|i| std::mem::take(&mut totals[i]).merge(col[i].clone()));
        }
        for (t, tally) in Theorem::ALL.iter().zip(&totals) {
            assert!(tally.checked > 0, "{t:?} never applied");
            assert_eq!(tally.violations, 0, "{t:?}: {:?}", tally.counterexamples.first());
        }
    }

    #[test]
    fn draw_limits() {
        assert_eq!(max_draws(500), 500);
        assert_eq!(max_draws(2000), 500);
    }

    #[test]
    fn sampling_grid_respects_preconditions() {
        let grid = sampling_grid(400);
        assert!(!grid.is_empty());
        for c in &grid {
            let beta = c.k as f64 / c.n as f64;
            assert!(c.m_draw * 4 <= c.n && c.m_draw as f64 * beta >= 8.0 && beta >= 4.0 * c.eps);
        }
    }
}
