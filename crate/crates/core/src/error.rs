use alloc::string::String;

use thiserror::Error;

/// Errors raised by the analysis and simulation core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid array scheme: {0}")]
    InvalidScheme(String),

    #[error("disk position {0} does not belong to this scheme")]
    UnknownPosition(String),

    #[error(
        "enumeration needs {subsets} subsets at level {level}, above the budget of {budget}; \
         enable sampling to estimate this profile"
    )]
    BudgetExceeded { level: usize, subsets: u128, budget: u128 },

    #[error("invalid survival profile: {0}")]
    InvalidProfile(String),

    #[error("fatal fraction is only defined for k in {lo}..={hi}, got {k}")]
    UnsupportedLevel { k: usize, lo: usize, hi: usize },

    #[error("invalid group query: {0}")]
    InvalidQuery(String),

    #[error("invalid bathtub profile: {0}")]
    InvalidBathtub(String),

    #[error("age must be non-negative, got {0}")]
    NegativeAge(f64),

    #[error("interval [{from}, {to}] is reversed")]
    ReversedInterval { from: f64, to: f64 },

    #[error("uniform variate must lie strictly inside (0, 1), got {0}")]
    UniformOutOfRange(f64),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("reliability must lie in [0, 1), got {0}")]
    ReliabilityOutOfRange(f64),

    #[error("invalid count: {0}")]
    InvalidCount(String),
}

pub type Result<T> = core::result::Result<T, Error>;
