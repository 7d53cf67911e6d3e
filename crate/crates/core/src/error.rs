use thiserror::Error;

/// Errors raised by the accounting, sampling and inference routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DpError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("statistic {stat} needs {need} column(s) but the dataset has {have}")]
    Arity {
        stat: &'static str,
        need: usize,
        have: usize,
    },
    #[error("bounds violation: {0}")]
    Bounds(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("not enough data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, DpError>;

pub(crate) fn domain(msg: impl Into<String>) -> DpError {
    DpError::Domain(msg.into())
}
