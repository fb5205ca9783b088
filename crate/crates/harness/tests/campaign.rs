use ftselect::Constants;
use ftselect_harness::campaign::{trial_seed, CampaignSummary};
use ftselect_harness::report::{parse_json, records_csv};
use ftselect_harness::{emit_report, run_campaign, run_trial, Algorithm, CampaignConfig, Format};

const HEADER: &str = "trial_id,n,k,eps,p,q_target,seed,returned_rank,success,oracle_calls,rounds,exhausted,wall_ns";

fn small(algorithm: Algorithm, trials: u64) -> CampaignConfig {
    CampaignConfig {
        algorithm,
        n: 2001,
        k: 1001,
        eps: 0.15,
        p: 0.25,
        q: 0.2,
        trials,
        seed: 42,
        constants: Constants::scaled(0.01).unwrap(),
        workers: 1,
        timing: false,
        charge_dummies: false,
    }
}

#[test]
fn empty_campaign() {
    let c = run_campaign(&small(Algorithm::Median, 0)).unwrap();
    assert!(c.records.is_empty());
    assert_eq!((c.summary.trials, c.summary.failures), (0, 0));
    assert!(c.summary.wilson_upper_95 >= c.summary.failure_rate);
    let csv = emit_report(&c, Format::Csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap(), format!("{HEADER}\n"));
}

#[test]
fn one_trial_row_in_declared_order() {
    let c = run_campaign(&small(Algorithm::Kselect, 1)).unwrap();
    let text = String::from_utf8(emit_report(&c, Format::Csv).unwrap()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], HEADER);
    let r = &c.records[0];
    let expected = format!(
        "0,2001,1001,0.15,0.25,0.2,{},{},{},{},{},false,0",
        r.seed, r.returned_rank, r.success, r.oracle_calls, r.rounds
    );
    assert_eq!(lines[1], expected);
    assert!(r.oracle_calls > 0);
}

#[test]
fn fixed_seed_is_byte_identical_across_worker_counts() {
    let cfg = small(Algorithm::Select, 6);
    let a = records_csv(&run_campaign(&cfg).unwrap().records).unwrap();
    let b = records_csv(&run_campaign(&CampaignConfig { workers: 3, ..cfg }).unwrap().records).unwrap();
    assert_eq!(a, b);
    let other = records_csv(&run_campaign(&CampaignConfig { seed: 43, ..cfg }).unwrap().records).unwrap();
    assert_ne!(a, other);
}

#[test]
fn json_round_trips() {
    let c = run_campaign(&small(Algorithm::Median, 5)).unwrap();
    let bytes = emit_report(&c, Format::Json).unwrap();
    assert_eq!(parse_json(&bytes).unwrap(), c);
    assert!("xml".parse::<Format>().is_err());
}

#[test]
fn records_replay_in_isolation() {
    let cfg = small(Algorithm::Median, 8);
    let c = run_campaign(&cfg).unwrap();
    for r in c.records.iter().rev() {
        assert_eq!(run_trial(&cfg, r.trial_id).unwrap(), *r);
        assert_eq!(r.seed, trial_seed(cfg.seed, r.trial_id));
    }
    let mut seeds: Vec<u64> = c.records.iter().map(|r| r.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    assert_eq!(seeds.len(), c.records.len());
}

#[test]
fn summary_recomputes_from_records() {
    let cfg = CampaignConfig { eps: 0.02, constants: Constants::scaled(0.001).unwrap(), ..small(Algorithm::Kselect, 40) };
    let c = run_campaign(&cfg).unwrap();
    let n = c.records.len() as f64;
    let failures = c.records.iter().filter(|r| !r.success).count() as u64;
    assert_eq!(c.summary.failures, failures);
    for r in &c.records {
        // Success straight from the definition: rank in (k − nε, k + nε].
        let lo = r.k as f64 - r.n as f64 * r.eps;
        let hi = r.k as f64 + r.n as f64 * r.eps;
        let rank = r.returned_rank as f64;
        assert_eq!(r.success, r.returned_rank >= 1 && r.returned_rank <= r.n && rank > lo && rank <= hi);
    }
    let phat = failures as f64 / n;
    let z = 1.96f64;
    let wilson = (phat + z * z / (2.0 * n) + z * (phat * (1.0 - phat) / n + z * z / (4.0 * n * n)).sqrt()) / (1.0 + z * z / n);
    assert!((c.summary.wilson_upper_95 - wilson).abs() < 1e-12);
    assert!(c.summary.wilson_upper_95 >= c.summary.failure_rate);
    let mean = c.records.iter().map(|r| r.oracle_calls as f64).sum::<f64>() / n;
    assert!((c.summary.mean_calls - mean).abs() <= 1e-9 * mean);
    let mut calls: Vec<u64> = c.records.iter().map(|r| r.oracle_calls).collect();
    calls.sort_unstable();
    assert_eq!(c.summary.p50_calls, calls[19] as f64);
    assert_eq!(c.summary.p99_calls, calls[39] as f64);
    assert_eq!(CampaignSummary::from_records(cfg, &c.records), c.summary);
}

#[test]
fn records_echo_configuration() {
    let cfg = small(Algorithm::Select, 2);
    let c = run_campaign(&cfg).unwrap();
    for r in &c.records {
        assert_eq!(r.constants, "scaled:0.01");
        assert_eq!(r.algorithm, Algorithm::Select);
        assert!(r.rounds >= 1);
        assert_eq!(r.wall_ns, 0);
    }
    let timed = run_campaign(&CampaignConfig { timing: true, trials: 1, ..cfg }).unwrap();
    assert!(timed.records[0].wall_ns > 0);
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(run_campaign(&CampaignConfig { eps: 0.7, ..small(Algorithm::Select, 1) }).is_err());
    assert!(run_campaign(&CampaignConfig { k: 3, ..small(Algorithm::Median, 1) }).is_err());
}
