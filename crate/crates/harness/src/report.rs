//! CSV and JSON serialisation of campaigns.

use std::fmt;
use std::str::FromStr;

use crate::campaign::{Campaign, TrialRecord};
use crate::error::{HarnessError, Result};

pub const CSV_HEADER: [&str; 13] = [
    "trial_id",
    "n",
    "k",
    "eps",
    "p",
    "q_target",
    "seed",
    "returned_rank",
    "success",
    "oracle_calls",
    "rounds",
    "exhausted",
    "wall_ns",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(HarnessError::UnknownFormat(other.to_owned())),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// CSV carries one row per trial under [`CSV_HEADER`]; JSON carries the
/// summary (with its configuration) and every record.
pub fn emit_report(campaign: &Campaign, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Csv => records_csv(&campaign.records),
        Format::Json => Ok(serde_json::to_vec_pretty(campaign)?),
    }
}

pub fn records_csv(records: &[TrialRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.trial_id.to_string(),
            r.n.to_string(),
            r.k.to_string(),
            r.eps.to_string(),
            r.p.to_string(),
            r.q_target.to_string(),
            r.seed.to_string(),
            r.returned_rank.to_string(),
            r.success.to_string(),
            r.oracle_calls.to_string(),
            r.rounds.to_string(),
            r.exhausted.to_string(),
            r.wall_ns.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))
}

pub fn parse_json(bytes: &[u8]) -> Result<Campaign> {
    Ok(serde_json::from_slice(bytes)?)
}
