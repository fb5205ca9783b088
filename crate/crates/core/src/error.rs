use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("target rank {k} outside 1..={n}")]
    RankOutOfRange { k: u64, n: u64 },
    #[error("epsilon {0} outside (0, 1/2)")]
    EpsilonOutOfRange(f64),
    #[error("error probability {0} outside [0, 1/2)")]
    ErrorRateOutOfRange(f64),
    #[error("failure budget {0} outside (0, 1/2)")]
    FailureBudgetOutOfRange(f64),
    #[error("population must be non-empty")]
    EmptyPopulation,
    #[error("scale factor {0} outside (0, 1]")]
    ScaleOutOfRange(f64),
    #[error("argument outside the open unit interval: {0}")]
    OutsideUnitInterval(f64),
    #[error("schedule invariant violated at level {level}: {what}")]
    InvariantViolated { level: usize, what: String },
    #[error("invalid hypergeometric instance: {0}")]
    InvalidHyper(String),
}

pub type Result<T> = std::result::Result<T, Error>;
