use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ftselect_harness::config::{constants_from, parse_settings};
use ftselect_harness::verify::{check_median_law, check_median_simulation, check_votes, sweep_bounds, write_bounds};
use ftselect_harness::{emit_report, run_campaign, CampaignConfig, Format, HarnessError, Result};

#[derive(Parser)]
#[command(name = "ftselect", version, about = "Approximate selection with faulty comparisons")]
struct Cli {
    /// File of key=value settings; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One end-to-end run: prints the returned rank and the calls spent.
    Select(Problem),
    /// A Monte Carlo campaign.
    Bench(Bench),
    /// Checks of the probability bounds and primitives.
    #[command(subcommand)]
    Verify(Verify),
}

#[derive(Args)]
struct Problem {
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// paper | scaled
    #[arg(long)]
    constants: Option<String>,
    #[arg(long)]
    scale_factor: Option<f64>,
    /// select | kselect | median
    #[arg(long)]
    algorithm: Option<String>,
}

#[derive(Args)]
struct Bench {
    #[command(flatten)]
    problem: Problem,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
    /// Record wall-clock time per trial (reports stop being reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand)]
enum Verify {
    /// Exhaustive sweeps of the hypergeometric and sampling bounds.
    Bounds {
        #[arg(long = "grid-max-M", default_value_t = 2000)]
        grid_max_m: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Vote failure and median-of-three checks.
    Primitives {
        #[arg(long, default_value_t = 0.25)]
        p: f64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn file_settings(path: Option<&PathBuf>) -> Result<BTreeMap<String, String>> {
    match path {
        Some(p) => parse_settings(&std::fs::read_to_string(p)?),
        None => Ok(BTreeMap::new()),
    }
}

fn build_config(settings: &BTreeMap<String, String>, problem: &Problem) -> Result<CampaignConfig> {
    let mut cfg = CampaignConfig::default();
    cfg.apply(settings)?;
    macro_rules! set {
        ($($field:ident),*) => {$(if let Some(v) = problem.$field { cfg.$field = v; })*};
    }
    set!(n, k, eps, p, q, seed);
    if problem.k.is_none() && !settings.contains_key("k") {
        cfg.k = cfg.n.div_ceil(2);
    }
    if let Some(a) = &problem.algorithm {
        cfg.algorithm = a.parse()?;
    }
    if problem.constants.is_some() || problem.scale_factor.is_some() {
        cfg.constants = constants_from(problem.constants.as_deref(), problem.scale_factor, cfg.constants)?;
    }
    Ok(cfg)
}

fn select(settings: &BTreeMap<String, String>, problem: &Problem) -> Result<ExitCode> {
    let cfg = CampaignConfig { trials: 1, ..build_config(settings, problem)? };
    let record = ftselect_harness::run_trial(&cfg, 0)?;
    println!(
        "rank {} of {} (target {} ± {:.0}) {} calls {} rounds {}{}",
        record.returned_rank,
        cfg.n,
        cfg.k,
        cfg.n as f64 * cfg.eps,
        if record.success { "success" } else { "failure" },
        record.oracle_calls,
        record.rounds,
        if record.exhausted { " exhausted" } else { "" },
    );
    Ok(ExitCode::SUCCESS)
}

fn bench(settings: &BTreeMap<String, String>, args: &Bench) -> Result<ExitCode> {
    let mut cfg = build_config(settings, &args.problem)?;
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    cfg.timing |= args.timing;
    let format: Format = args.format.as_deref().or(settings.get("format").map(String::as_str)).unwrap_or("csv").parse()?;
    let out = args.out.clone().or_else(|| settings.get("out").map(PathBuf::from));
    cfg.validate()?;

    let campaign = run_campaign(&cfg)?;
    let bytes = emit_report(&campaign, format)?;
    match out {
        Some(path) => std::fs::write(path, bytes)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes)?;
        }
    }
    let s = &campaign.summary;
    let target = cfg.algorithm.target_failure(cfg.q);
    eprintln!(
        "{} trials ({}, {}): {} failures, rate {:.4}, wilson95 {:.4} (target {:.4}), mean calls {:.4e}, p99 {:.4e}, mean rounds {:.3}",
        s.trials, cfg.algorithm, cfg.constants, s.failures, s.failure_rate, s.wilson_upper_95, target, s.mean_calls, s.p99_calls, s.mean_rounds
    );
    Ok(if s.trials == 0 || s.meets_target(1.5) { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn verify(command: &Verify) -> Result<ExitCode> {
    let ok = match command {
        Verify::Bounds { grid_max_m, out } => {
            let sweep = sweep_bounds(*grid_max_m);
            for t in &sweep.tallies {
                let tightest = t.tally.tightest.as_ref().map_or(f64::NAN, |r| r.slack);
                println!(
                    "{:<24} checked {:>11} not-applicable {:>11} violations {:>4} min log-slack {:.4}",
                    t.name, t.tally.checked, t.tally.not_applicable, t.tally.violations, tightest
                );
            }
            if let Some(dir) = out {
                write_bounds(&sweep, dir)?;
            }
            sweep.violations() == 0
        }
        Verify::Primitives { p, trials, seed } => {
            if !(0.0..0.5).contains(p) {
                return Err(HarnessError::Config(format!("p = {p} outside [0, 1/2)")));
            }
            let mut checks = check_votes(*p);
            checks.push(check_median_law(*p));
            checks.push(check_median_simulation(*p, *trials, *seed));
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            checks.iter().all(|c| c.passed)
        }
    };
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = file_settings(cli.config.as_ref()).map_err(|e| match e {
        HarnessError::Io(io) => HarnessError::Config(format!("cannot read config file: {io}")),
        other => other,
    });
    let result = result.and_then(|settings| match &cli.command {
        Command::Select(problem) => select(&settings, problem),
        Command::Bench(args) => bench(&settings, args),
        Command::Verify(v) => verify(v),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
