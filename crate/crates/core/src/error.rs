use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("empty sample set")]
    EmptySamples,

    #[error("no candidate node to associate with")]
    NoCandidates,

    #[error("target {target} not reachable in [{low}, {high}] (coverage {cov_low:.4} .. {cov_high:.4})")]
    BracketExhausted {
        target: f64,
        low: f64,
        high: f64,
        cov_low: f64,
        cov_high: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn arg(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}
