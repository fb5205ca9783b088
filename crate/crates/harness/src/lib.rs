//! Monte Carlo campaigns, scaling fits, reports and exact-oracle checks for
//! [`ftselect`].

pub mod campaign;
pub mod config;
pub mod error;
pub mod fit;
pub mod report;
pub mod stats;
pub mod verify;

pub use campaign::{run_campaign, run_trial, Campaign, CampaignSummary, TrialRecord};
pub use config::{Algorithm, CampaignConfig};
pub use error::{HarnessError, Result};
pub use fit::{fit_scaling, Axis, Fit};
pub use report::{emit_report, Format};
