//! Exact probability engines and the inequalities they verify.
//!
//! Two tiers: [`exact`] works in big rationals and is only practical for
//! small populations; everything else is log-space floating point.

pub mod exact;
pub mod hyper;
pub mod special;
pub mod sweep;
pub mod theorems;

pub use hyper::{pmf as hyper_pmf, tail as hyper_tail, HyperSpec, HyperTable};
pub use theorems::{
    chernoff_bounds, cor_c2, eta, kl_div, pointmass_lower_bound, sampling_lemma_check, tail_lower_bound, BoundReport,
    BoundStatus,
};
