use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("decision variable {index} = {value} outside [{lower}, {upper}]")]
    OutOfBounds {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("invalid preference vector: {0}")]
    InvalidPreference(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite numeric state: {0}")]
    NumericState(String),

    #[error("unsupported objective count {0} (only 2 and 3 are supported)")]
    UnsupportedDimension(usize),

    #[error("checkpoint parse error: {0}")]
    Checkpoint(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::Dimension { expected, actual })
    }
}
