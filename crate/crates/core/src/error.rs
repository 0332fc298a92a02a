use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{name} = {value} is outside its domain ({domain})")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("refinement needed on [{t0}, {t1}]: {reason}")]
    RefinementNeeded { t0: f64, t1: f64, reason: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("not in general position near ({x}, {y}): {reason}")]
    GeneralPosition { x: f64, y: f64, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("fit rejected: {0}")]
    Fit(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
