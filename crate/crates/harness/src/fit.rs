//! Scaling-law fits over families of campaigns.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::campaign::CampaignSummary;
use crate::config::CampaignConfig;
use crate::error::{HarnessError, Result};
use crate::stats::linear_fit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Eps,
    KOverN,
    /// `ln(1/Q)`; fitted linearly rather than on log-log axes.
    LogQ,
}

impl Axis {
    fn value(self, cfg: &CampaignConfig) -> f64 {
        match self {
            Axis::Eps => cfg.eps,
            Axis::KOverN => cfg.k as f64 / cfg.n as f64,
            Axis::LogQ => (1.0 / cfg.q).ln(),
        }
    }

    /// `cfg` with the axis parameter and the bookkeeping fields blanked, so
    /// two campaigns on the same line compare equal.
    fn others(self, cfg: &CampaignConfig) -> CampaignConfig {
        let mut c = *cfg;
        match self {
            Axis::Eps => c.eps = 0.25,
            Axis::KOverN => c.k = 1,
            Axis::LogQ => c.q = 0.25,
        }
        c.trials = 0;
        c.seed = 0;
        c.workers = 1;
        c.timing = false;
        c
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Eps => "eps",
            Axis::KOverN => "k_over_n",
            Axis::LogQ => "logQ",
        })
    }
}

impl FromStr for Axis {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eps" => Ok(Axis::Eps),
            "k_over_n" => Ok(Axis::KOverN),
            "logQ" | "logq" => Ok(Axis::LogQ),
            other => Err(HarnessError::Fit(format!("unknown axis {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    /// Log-log slope for `eps` and `k_over_n`; calls per unit of `ln(1/Q)`
    /// for `logQ`.
    pub exponent: f64,
    pub r_squared: f64,
}

/// Least-squares fit of mean calls against one axis.
pub fn fit_scaling(summaries: &[CampaignSummary], axis: Axis) -> Result<Fit> {
    if summaries.len() < 3 {
        return Err(HarnessError::Fit(format!("need at least 3 campaigns, got {}", summaries.len())));
    }
    let reference = axis.others(&summaries[0].config);
    if let Some(s) = summaries.iter().find(|s| axis.others(&s.config) != reference) {
        return Err(HarnessError::Fit(format!("campaigns vary in more than {axis}: {:?}", s.config)));
    }
    let xs: Vec<f64> = summaries.iter().map(|s| axis.value(&s.config)).collect();
    for (i, x) in xs.iter().enumerate() {
        if xs[..i].contains(x) {
            return Err(HarnessError::Fit(format!("repeated {axis} value {x}")));
        }
    }
    if let Some(s) = summaries.iter().find(|s| s.mean_calls.is_nan() || s.mean_calls <= 0.0) {
        return Err(HarnessError::Fit(format!("campaign without calls: {:?}", s.config)));
    }
    let ys: Vec<f64> = summaries.iter().map(|s| s.mean_calls).collect();
    let (exponent, _, r_squared) = match axis {
        Axis::LogQ => linear_fit(&xs, &ys),
        _ => {
            let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
            let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
            linear_fit(&lx, &ly)
        }
    };
    Ok(Fit { exponent, r_squared })
}
