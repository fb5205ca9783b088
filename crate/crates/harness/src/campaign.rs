//! Monte Carlo campaigns: independent trials on fresh universes.

use std::time::Instant;

use ftselect::approx_median::{approx_median_with, MedianScheduleF64};
use ftselect::oracle::classify;
use ftselect::primitives::q_of;
use ftselect::toplevel::select_approx_with;
use ftselect::{CounterRng, GroundTruth, KSelectPlan, NoisyOracle, RankClass, TopLevelConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Algorithm, CampaignConfig};
use crate::error::{HarnessError, Result};
use crate::stats::{mean, percentile, standard_error, wilson_upper, Z_95};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub n: u64,
    pub k: u64,
    pub eps: f64,
    pub p: f64,
    pub q_target: f64,
    pub seed: u64,
    /// Original rank of the returned element; 0 for a dummy, `n + 1` for the
    /// padding element of an odd population.
    pub returned_rank: u64,
    pub success: bool,
    pub oracle_calls: u64,
    /// Trial-and-error rounds for `select`, purifying rounds otherwise.
    pub rounds: u32,
    pub exhausted: bool,
    pub wall_ns: u64,
    pub algorithm: Algorithm,
    /// `paper` or `scaled:σ`.
    pub constants: String,
}

/// Whether `returned_rank` lies in `(k − nε, k + nε]`.
pub fn is_success(returned_rank: u64, n: u64, k: u64, eps: f64) -> bool {
    (1..=n).contains(&returned_rank) && classify(returned_rank, n, k, eps) == RankClass::Relevant
}

/// Seed of trial `trial_id`: output `trial_id` of the master's stream.
pub fn trial_seed(master: u64, trial_id: u64) -> u64 {
    CounterRng::new(master).at(trial_id)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub config: CampaignConfig,
    pub trials: u64,
    pub failures: u64,
    pub failure_rate: f64,
    pub wilson_upper_95: f64,
    pub mean_calls: f64,
    pub p50_calls: f64,
    pub p99_calls: f64,
    pub mean_rounds: f64,
    pub rounds_std_error: f64,
    pub exhausted: u64,
}

impl CampaignSummary {
    pub fn from_records(config: CampaignConfig, records: &[TrialRecord]) -> Self {
        let trials = records.len() as u64;
        let failures = records.iter().filter(|r| !r.success).count() as u64;
        let mut calls: Vec<u64> = records.iter().map(|r| r.oracle_calls).collect();
        calls.sort_unstable();
        let rounds: Vec<f64> = records.iter().map(|r| f64::from(r.rounds)).collect();
        CampaignSummary {
            config,
            trials,
            failures,
            failure_rate: if trials == 0 { 0.0 } else { failures as f64 / trials as f64 },
            wilson_upper_95: wilson_upper(failures, trials, Z_95),
            mean_calls: mean(calls.iter().map(|&c| c as f64)),
            p50_calls: percentile(&calls, 50.0),
            p99_calls: percentile(&calls, 99.0),
            mean_rounds: mean(rounds.iter().copied()),
            rounds_std_error: standard_error(&rounds),
            exhausted: records.iter().filter(|r| r.exhausted).count() as u64,
        }
    }

    /// Wilson upper bound within `slack` times the proven failure probability.
    pub fn meets_target(&self, slack: f64) -> bool {
        self.wilson_upper_95 <= slack * self.config.algorithm.target_failure(self.config.q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Campaign {
    pub summary: CampaignSummary,
    pub records: Vec<TrialRecord>,
}

/// Coin-independent setup shared by every trial of a campaign.
enum Prepared {
    Select(KSelectPlan, TopLevelConfig),
    Kselect(KSelectPlan),
    Median(MedianScheduleF64),
}

impl Prepared {
    fn new(cfg: &CampaignConfig) -> Result<Self> {
        let working_n = cfg.n + cfg.n % 2;
        let working_k = if 2 * cfg.k > cfg.n { cfg.n - cfg.k } else { cfg.k };
        Ok(match cfg.algorithm {
            Algorithm::Median => Prepared::Median(MedianScheduleF64::new(working_n, cfg.eps, cfg.constants)?),
            algorithm => {
                let plan = KSelectPlan::new(working_n, working_k, cfg.eps, q_of(cfg.p), cfg.constants)?;
                if algorithm == Algorithm::Select {
                    Prepared::Select(plan, TopLevelConfig::new(cfg.q)?)
                } else {
                    Prepared::Kselect(plan)
                }
            }
        })
    }
}

fn run_prepared(cfg: &CampaignConfig, prepared: &Prepared, trial_id: u64) -> Result<TrialRecord> {
    let seed = trial_seed(cfg.seed, trial_id);
    let truth = GroundTruth::new(cfg.n, cfg.k, cfg.eps, seed)?;
    let mut oracle = NoisyOracle::new(&truth, cfg.p, seed)?.with_dummy_charging(cfg.charge_dummies);
    let items = truth.population();
    let start = Instant::now();
    let (element, rounds, exhausted) = match prepared {
        Prepared::Select(plan, top) => {
            let out = select_approx_with(&mut oracle, &items, plan, top)?;
            (out.element, out.rounds, out.exhausted)
        }
        Prepared::Kselect(plan) => {
            let run = plan.run(&mut oracle, &items)?;
            (run.element, run.round_calls.len() as u32, false)
        }
        Prepared::Median(schedule) => {
            let run = approx_median_with(&mut oracle, &items, schedule)?;
            (run.element, run.round_calls.len() as u32, false)
        }
    };
    let wall_ns = if cfg.timing { start.elapsed().as_nanos() as u64 } else { 0 };
    let returned_rank = truth.rank(element).unwrap_or(0);
    Ok(TrialRecord {
        trial_id,
        n: cfg.n,
        k: cfg.k,
        eps: cfg.eps,
        p: cfg.p,
        q_target: cfg.q,
        seed,
        returned_rank,
        success: is_success(returned_rank, cfg.n, cfg.k, cfg.eps),
        oracle_calls: ftselect::Comparator::calls(&oracle),
        rounds,
        exhausted,
        wall_ns,
        algorithm: cfg.algorithm,
        constants: cfg.constants.to_string(),
    })
}

/// Replays one trial of a campaign in isolation.
pub fn run_trial(cfg: &CampaignConfig, trial_id: u64) -> Result<TrialRecord> {
    cfg.validate()?;
    run_prepared(cfg, &Prepared::new(cfg)?, trial_id)
}

/// Runs `cfg.trials` trials on up to `cfg.workers` threads. Records come back
/// in trial order regardless of scheduling.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<Campaign> {
    cfg.validate()?;
    let prepared = Prepared::new(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let records = pool.install(|| {
        (0..cfg.trials).into_par_iter().map(|id| run_prepared(cfg, &prepared, id)).collect::<Result<Vec<_>>>()
    })?;
    Ok(Campaign { summary: CampaignSummary::from_records(*cfg, &records), records })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn success_predicate() {
        // n = 100, k = 50, eps = 0.1: relevant ranks 41..=60.
        assert!(!is_success(40, 100, 50, 0.1));
        assert!(is_success(41, 100, 50, 0.1));
        assert!(is_success(60, 100, 50, 0.1));
        assert!(!is_success(61, 100, 50, 0.1));
        assert!(!is_success(0, 100, 50, 0.4));
        assert!(!is_success(101, 100, 99, 0.4));
    }

    #[test]
    fn trial_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..10_000).map(|i| trial_seed(7, i)).collect();
        assert_eq!(seeds.len(), 10_000);
    }
}
