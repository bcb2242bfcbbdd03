use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sequence")]
    EmptySequence,

    #[error("symbol {symbol} out of range (alphabet size is {alphabet_size})")]
    SymbolOutOfRange { symbol: usize, alphabet_size: usize },

    #[error("alphabet size mismatch: {left} vs {right}")]
    AlphabetMismatch { left: usize, right: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("full support required (symbol {symbol} has zero mass)")]
    FullSupportRequired { symbol: usize },

    #[error("distributions must differ")]
    IdenticalDistributions,

    #[error("split index {split} out of range 1..={max}")]
    SplitOutOfRange { split: usize, max: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("admissible interval is empty for n = {n}, theta = {theta}")]
    EmptyAdmissibleInterval { n: usize, theta: f64 },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("{source_name}:{line}:{column}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Process exit code for this error: 2 for bad input, 3 for a bad
    /// configuration, 4 for internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. }
            | Error::EmptyAdmissibleInterval { .. }
            | Error::IdenticalDistributions
            | Error::LengthMismatch(_) => 3,
            Error::Internal(_) => 4,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
