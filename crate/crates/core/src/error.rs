use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("model inconsistency: {0}")]
    ModelInconsistency(String),
    #[error("observation {obs} outside alphabet of size {size}")]
    Domain { obs: usize, size: usize },
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("numeric instability: {0}; use the naive recursion instead")]
    NumericInstability(String),
    #[error("invalid score: {0}")]
    InvalidScore(String),
    #[error("parameter inconsistency: {0}")]
    ParameterInconsistency(String),
    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("event at {t_ms} ms arrives before previous event at {prev_ms} ms")]
    Ordering { t_ms: f64, prev_ms: f64 },
    #[error("annotation error: {0}")]
    Annotation(String),
    #[error("target out of range: {0}")]
    Range(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
