use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A reinforcement specification or walk configuration is invalid.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    /// Unparseable configuration text (reinforcement family strings, table files, flags).
    #[error("parse error: {0}")]
    Parse(String),

    /// A sampled step time exceeded the configured hard cap.
    #[error("sampled step time exceeded the cap T_max = {cap}")]
    CapExceeded { cap: u64 },

    /// Moment truncation could neither certify convergence nor divergence.
    #[error("indeterminate moment {moment}: no certificate after {terms} terms")]
    IndeterminateMoment { moment: &'static str, terms: u64 },

    /// A quantity was requested outside the regime where it exists.
    #[error("regime violation: requires {0}")]
    Regime(&'static str),

    #[error("walk kind mismatch: expected {expected}, found {found}")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("time {n} is outside the covered horizon 1..={horizon}")]
    OutOfRange { n: u64, horizon: u64 },

    #[error("path covers {available} unit times but {needed} are required; extend the path")]
    PathTooShort { needed: u64, available: u64 },

    #[error("sample is not sorted in ascending order")]
    Unsorted,

    #[error("empty sample")]
    EmptySample,

    /// Replayed primitives disagree with the kernel of the direct simulator.
    #[error("inconsistent primitives: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Configuration-class errors (bad input) as opposed to numeric or regime failures.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidSpec(_) | Error::Parse(_) | Error::KindMismatch { .. }
        )
    }
}
