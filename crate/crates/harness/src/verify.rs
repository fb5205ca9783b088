//! Exact-oracle checks behind `ftselect verify`.

use std::fs;
use std::path::Path;

use ftselect::bounds::special::LnFactorial;
use ftselect::bounds::sweep::{sampling_case, sampling_grid, sweep_column, SweepRow, SweepTally, Theorem};
use ftselect::oracle::{Element, GroundTruth, NoisyOracle};
use ftselect::primitives::{median_of_three, median_of_three_law, vote_failure, vote_failure_exact, VoteParams};
use ftselect::{Rational, Scalar};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Populations swept by `verify bounds`, capped at the requested maximum.
pub const SWEEP_POPULATIONS: [u64; 4] = [200, 500, 1000, 2000];

pub const SAMPLING_PARTS: [&str; 3] = ["sampling_small_side", "sampling_large_side", "sampling_not_relevant"];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedTally {
    pub name: String,
    pub tally: SweepTally,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundsSweep {
    pub populations: Vec<u64>,
    pub sampling_max_n: u64,
    /// One entry per hypergeometric theorem, then the three sampling parts.
    pub tallies: Vec<NamedTally>,
    /// Tightest row of every `(M, K)` column, per hypergeometric theorem.
    #[serde(skip)]
    pub columns: Vec<Vec<SweepRow>>,
}

impl BoundsSweep {
    pub fn violations(&self) -> u64 {
        self.tallies.iter().map(|t| t.tally.violations).sum()
    }
}

fn merge3(a: [SweepTally; 3], b: [SweepTally; 3]) -> [SweepTally; 3] {
    let [a0, a1, a2] = a;
    let [b0, b1, b2] = b;
    [a0.merge(b0), a1.merge(b1), a2.merge(b2)]
}

/// Every column `(M, K)`, `0 ≤ K ≤ M`, of one population.
pub fn sweep_population(population: u64) -> Vec<[SweepTally; 3]> {
    let lnf = LnFactorial::new(population);
    (0..=population).into_par_iter().map(|k| sweep_column(population, k, &lnf)).collect()
}

pub fn sweep_sampling(max_n: u64) -> [SweepTally; 3] {
    sampling_grid(max_n).par_iter().map(sampling_case).reduce(Default::default, merge3)
}

pub fn sweep_bounds(max_population: u64) -> BoundsSweep {
    let mut populations: Vec<u64> = SWEEP_POPULATIONS.iter().copied().filter(|&m| m <= max_population).collect();
    if populations.is_empty() {
        populations.push(max_population.max(1));
    }
    let mut totals: [SweepTally; 3] = Default::default();
    let mut columns = vec![Vec::new(), Vec::new(), Vec::new()];
    for &m in &populations {
        for col in sweep_population(m) {
            for (slot, tally) in col.iter().enumerate() {
                if let Some(row) = &tally.tightest {
                    columns[slot].push(row.clone());
                }
            }
            totals = merge3(totals, col);
        }
    }
    let sampling = sweep_sampling(max_population);
    let mut tallies: Vec<NamedTally> = Theorem::ALL
        .iter()
        .zip(totals)
        .map(|(t, tally)| NamedTally { name: t.name().to_owned(), tally })
        .collect();
    tallies.extend(SAMPLING_PARTS.iter().zip(sampling).map(|(name, tally)| NamedTally { name: (*name).to_owned(), tally }));
    BoundsSweep { populations, sampling_max_n: max_population, tallies, columns }
}

/// Writes `<theorem>.csv` (tightest row per column), `counterexamples.csv`
/// and `summary.json` into `dir`.
pub fn write_bounds(sweep: &BoundsSweep, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (theorem, rows) in Theorem::ALL.iter().zip(&sweep.columns) {
        let mut w = csv::Writer::from_path(dir.join(format!("{}.csv", theorem.name())))?;
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
    }
    let mut w = csv::Writer::from_path(dir.join("counterexamples.csv"))?;
    w.write_record(["bound", "M", "K", "m", "l", "a", "b", "x", "exact", "bound_value", "holds", "slack"])?;
    for named in &sweep.tallies {
        for r in &named.tally.counterexamples {
            w.write_record([
                named.name.clone(),
                r.population.to_string(),
                r.successes.to_string(),
                r.draws.to_string(),
                r.threshold.to_string(),
                r.a.to_string(),
                r.b.to_string(),
                r.x.to_string(),
                r.exact.to_string(),
                r.bound.to_string(),
                r.holds.to_string(),
                r.slack.to_string(),
            ])?;
        }
    }
    w.flush()?;
    fs::write(dir.join("summary.json"), serde_json::to_vec_pretty(sweep)?)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Vote failures for `t = 1..=6`: below `e^{−t}`, and the log-space value
/// agrees with exact rational summation.
pub fn check_votes(p: f64) -> Vec<Check> {
    let exact_p = p.to_rational();
    (1..=6)
        .map(|t| {
            let fast = vote_failure_exact(&VoteParams::new(p, t));
            let exact = vote_failure(&exact_p, t).to_f64();
            let rel = if exact == 0.0 { fast.abs() } else { ((fast - exact) / exact).abs() };
            let bound = (-f64::from(t)).exp();
            Check {
                name: format!("vote p={p} t={t}"),
                passed: fast <= bound && rel <= 1e-10,
                detail: format!("failure {fast:.6e} (bound {bound:.6e}), relative gap to exact {rel:.1e}"),
            }
        })
        .collect()
}

/// The enumerated median-of-three law for `g` = vote failure at `t = 4`.
pub fn check_median_law(p: f64) -> Check {
    let g = vote_failure(&p.to_rational(), 4);
    let law = median_of_three_law(&g);
    let one = Rational::from_ratio(1, 1);
    let side = Rational::from_ratio(4, 3) * g.clone() * (one - g);
    let passed = law.min == law.max && law.min == side && law.median >= Rational::from_ratio(12, 13);
    Check {
        name: format!("median_of_three law p={p}"),
        passed,
        detail: format!("Pr[min] = Pr[max] = {:.6e}, Pr[median] = {:.9}", law.min.to_f64(), law.median.to_f64()),
    }
}

/// Monte Carlo of [`median_of_three`] on three elements against the law;
/// passes when the min/max frequencies are within 4 standard errors.
pub fn check_median_simulation(p: f64, trials: u64, seed: u64) -> Check {
    let truth = GroundTruth::new(4, 2, 0.1, seed).expect("fixed instance");
    let mut oracle = NoisyOracle::new(&truth, p, seed).expect("p validated by caller");
    let mut sorted = truth.population();
    sorted.sort_by_key(|&e| truth.working_rank(e));
    let [lo, mid, hi]: [Element; 3] = [sorted[0], sorted[1], sorted[2]];
    let mut counts = [0u64; 3];
    for i in 0..trials {
        // Rotate the argument order so no position is favoured.
        let args = match i % 3 {
            0 => (lo, mid, hi),
            1 => (hi, lo, mid),
            _ => (mid, hi, lo),
        };
        let out = median_of_three(&mut oracle, args.0, args.1, args.2);
        counts[[lo, mid, hi].iter().position(|&e| e == out).expect("one of the inputs")] += 1;
    }
    let law = median_of_three_law(&vote_failure(&p.to_rational(), 4).to_f64());
    let n = trials.max(1) as f64;
    let within = |count: u64, prob: f64| {
        let se = (prob * (1.0 - prob) / n).sqrt().max(1.0 / n);
        (count as f64 / n - prob).abs() <= 4.0 * se
    };
    Check {
        name: format!("median_of_three simulation p={p}"),
        passed: within(counts[0], law.min) && within(counts[2], law.max),
        detail: format!("{trials} runs: min {}, median {}, max {}", counts[0], counts[1], counts[2]),
    }
}
