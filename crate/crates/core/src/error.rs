use thiserror::Error;

use crate::contfrac::BudgetOverflow;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid coefficient a_{index} = {value}: coefficients must be positive integers")]
    InvalidCoefficient { index: usize, value: String },

    #[error("insufficient depth: {0}")]
    InsufficientDepth(String),

    #[error(
        "bit budget of {} bits exceeded at level {} ({} needed)",
        .0.budget, .0.level, describe_bits(.0.needed_bits)
    )]
    BudgetExceeded(Box<BudgetOverflow>),

    #[error("unsupported curve {0} for this operation")]
    UnsupportedCurve(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid test curve {0}: boundary curves cannot be used as test curves")]
    InvalidTestCurve(String),

    #[error("curve panel misses torus {0}")]
    IncompletePanel(usize),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn describe_bits(bits: u64) -> String {
    if bits == u64::MAX {
        "more than 2^64 bits".to_string()
    } else {
        format!("{bits} bits")
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
