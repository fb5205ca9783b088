//! Fault-tolerant approximate selection under random comparison faults.
//!
//! Given `n` elements, a target rank `k` and a tolerance `eps`, the goal is to
//! return an element whose true rank lies in `(k − n·eps, k + n·eps]` when
//! every pairwise comparison is independently wrong with probability `p < 1/2`.
//!
//! Layers, bottom up: [`oracle`] simulates the fault model, [`primitives`]
//! boosts single comparisons, [`approx_median`] and [`approx_kselect`] reach
//! constant success probability, and [`toplevel`] amplifies to `1 − Q`.
//! [`bounds`] holds the exact probability engines used to check the analysis.

pub mod approx_kselect;
pub mod approx_median;
pub mod bounds;
pub mod error;
pub mod oracle;
pub mod primitives;
pub mod rng;
pub mod scalar;
pub mod toplevel;

pub use approx_kselect::{approx_kselect, ExactSelectSchedule, KSelectPlan, SelectSchedule, SelectScheduleF64};
pub use approx_median::{approx_median, Constants, ExactMedianSchedule, MedianSchedule, MedianScheduleF64};
pub use error::{Error, Result};
pub use oracle::{Comparator, Element, GroundTruth, NoisyOracle, RankClass};
pub use rng::CounterRng;
pub use scalar::Scalar;
pub use toplevel::{select_approx, SelectOutcome, TopLevelConfig};

/// Exact rational used by the schedule and probability oracles.
pub type Rational = num_rational::BigRational;
