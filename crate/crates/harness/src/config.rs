//! Campaign configuration: validation plus the `key=value` file format.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ftselect::Constants;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Which layer of the algorithm stack a campaign exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// End-to-end selection with failure budget `Q`.
    Select,
    /// One approximate k-selection (constant success probability).
    Kselect,
    /// One approximate median; requires `k = ⌈n/2⌉`.
    Median,
}

impl Algorithm {
    /// Failure probability the algorithm is proven to stay below.
    pub fn target_failure(self, q: f64) -> f64 {
        match self {
            Algorithm::Select => q,
            Algorithm::Kselect => 1.0 / 9.0,
            Algorithm::Median => 1.0 / 18.0,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Select => "select",
            Algorithm::Kselect => "kselect",
            Algorithm::Median => "median",
        })
    }
}

impl FromStr for Algorithm {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "select" => Ok(Algorithm::Select),
            "kselect" => Ok(Algorithm::Kselect),
            "median" => Ok(Algorithm::Median),
            other => Err(HarnessError::Config(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub algorithm: Algorithm,
    pub n: u64,
    pub k: u64,
    pub eps: f64,
    pub p: f64,
    pub q: f64,
    pub trials: u64,
    pub seed: u64,
    pub constants: Constants,
    pub workers: usize,
    /// Record wall-clock time per trial. Off keeps reports byte-reproducible.
    pub timing: bool,
    pub charge_dummies: bool,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            algorithm: Algorithm::Select,
            n: 100_000,
            k: 50_000,
            eps: 0.15,
            p: 0.25,
            q: 0.1,
            trials: 100,
            seed: 1,
            constants: Constants::Paper,
            workers: 1,
            timing: false,
            charge_dummies: false,
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.k == 0 || self.k > self.n {
            return bad(format!("k = {} outside 1..={}", self.k, self.n));
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return bad(format!("eps = {} outside (0, 1/2)", self.eps));
        }
        if !(0.0..0.5).contains(&self.p) {
            return bad(format!("p = {} outside [0, 1/2)", self.p));
        }
        if !(self.q > 0.0 && self.q < 0.5) {
            return bad(format!("q = {} outside (0, 1/2)", self.q));
        }
        if self.workers == 0 {
            return bad("workers must be positive".into());
        }
        if self.algorithm == Algorithm::Median && self.k != self.n.div_ceil(2) {
            return bad(format!("median campaigns need k = {}, got {}", self.n.div_ceil(2), self.k));
        }
        Ok(())
    }

    /// Applies `key=value` settings on top of `self`.
    pub fn apply(&mut self, settings: &BTreeMap<String, String>) -> Result<()> {
        let mut scale: Option<f64> = None;
        let mut constants: Option<String> = None;
        for (key, value) in settings {
            match key.as_str() {
                "algorithm" => self.algorithm = value.parse()?,
                "n" => self.n = parse(key, value)?,
                "k" => self.k = parse(key, value)?,
                "eps" => self.eps = parse(key, value)?,
                "p" => self.p = parse(key, value)?,
                "q" => self.q = parse(key, value)?,
                "trials" => self.trials = parse(key, value)?,
                "seed" => self.seed = parse(key, value)?,
                "workers" => self.workers = parse(key, value)?,
                "timing" => self.timing = parse(key, value)?,
                "charge-dummies" | "charge_dummies" => self.charge_dummies = parse(key, value)?,
                "constants" => constants = Some(value.clone()),
                "scale-factor" | "scale_factor" => scale = Some(parse(key, value)?),
                // Output settings are consumed by the CLI.
                "out" | "format" => {}
                other => return Err(HarnessError::Config(format!("unknown key {other:?}"))),
            }
        }
        if constants.is_some() || scale.is_some() {
            self.constants = constants_from(constants.as_deref(), scale, self.constants)?;
        }
        Ok(())
    }
}

/// Resolves `--constants` / `--scale-factor`. `scaled` without a factor
/// keeps the current scaled factor, or fails if there is none.
pub fn constants_from(mode: Option<&str>, scale: Option<f64>, current: Constants) -> Result<Constants> {
    let mode = mode.map(str::to_owned).unwrap_or_else(|| match current {
        Constants::Paper if scale.is_none() => "paper".into(),
        _ => "scaled".into(),
    });
    match mode.as_str() {
        "paper" => match scale {
            Some(s) if s != 1.0 => Err(HarnessError::Config("--scale-factor needs --constants scaled".into())),
            _ => Ok(Constants::Paper),
        },
        "scaled" => {
            let sigma = scale
                .or(match current {
                    Constants::Scaled(s) => Some(s),
                    Constants::Paper => None,
                })
                .ok_or_else(|| HarnessError::Config("--constants scaled needs --scale-factor".into()))?;
            Ok(Constants::scaled(sigma)?)
        }
        other => Ok(other.parse::<Constants>()?),
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| HarnessError::Config(format!("bad value {value:?} for {key}")))
}

/// Parses `key=value` lines. Blank lines and `#` comments are skipped.
pub fn parse_settings(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (number, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("line {}: expected key=value", number + 1)))?;
        out.insert(key.trim().to_owned(), value.trim().to_owned());
    }
    Ok(out)
}
