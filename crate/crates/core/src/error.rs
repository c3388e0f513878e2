use thiserror::Error;

/// Errors raised anywhere in the sampling and validation stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("rejection sampler exceeded {cap} proposals (accepted {accepted} points so far)")]
    RejectionCap { cap: u64, accepted: usize },

    #[error("conditioning by rejection exceeded {cap} retries")]
    RetryCap { cap: u64 },

    #[error("conditional density {value:e} is negative beyond rounding; basis orthogonality lost")]
    NegativeDensity { value: f64 },

    #[error("janossy routes disagree: fredholm={fredholm:e}, subsets={subsets:e}")]
    OracleMismatch { fredholm: f64, subsets: f64 },

    #[error("insufficient samples: {got} < {needed}")]
    InsufficientSamples { got: usize, needed: usize },

    #[error("inconsistent batch: {0}")]
    InconsistentBatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
