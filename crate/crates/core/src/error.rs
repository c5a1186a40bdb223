use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet size must be in 2..=256, got {0}")]
    InvalidAlphabet(usize),

    #[error("symbol {symbol} at index {index} is outside an alphabet of size {size}")]
    SymbolOutOfRange { symbol: u8, index: usize, size: usize },

    #[error("{0} must be nonempty")]
    Empty(&'static str),

    #[error("alphabet mismatch: {left} vs {right}")]
    AlphabetMismatch { left: usize, right: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("block of length {block} does not fit in a sequence of length {sequence}")]
    BlockTooLong { block: usize, sequence: usize },

    #[error("need at least {needed} occurrences, found {found}")]
    TooFewOccurrences { needed: usize, found: usize },

    #[error("window of {window} positions exceeds the {slots} available slots")]
    WindowTooLarge { window: usize, slots: usize },

    #[error("invalid process spec: {0}")]
    InvalidSpec(String),

    #[error("operation not supported for {0} processes")]
    Unsupported(&'static str),

    #[error("sequence of length {len} too short: {reason}")]
    SequenceTooShort { len: usize, reason: String },

    #[error("length {m} cannot be split into pieces of length {r} and {}", .r + 1)]
    Unsolvable { m: usize, r: usize },

    #[error("block family of size {k} does not fit length {l}: at most {max} distinct blocks")]
    FamilyTooLarge { k: usize, l: usize, max: u64 },

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no block of length {lo}..={hi} occurs at least {min_count} times")]
    NoQualifyingBlocks { lo: usize, hi: usize, min_count: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad parameters rather than bad data.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidPlan(_)
                | Error::InvalidParameter(_)
                | Error::InvalidAlphabet(_)
                | Error::FamilyTooLarge { .. }
        )
    }
}
