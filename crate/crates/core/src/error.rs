use thiserror::Error;

/// Errors raised by the library. The CLI maps each variant to an exit code.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("budget exhausted: {0}")]
    Budget(String),

    #[error("no crossing: {0}")]
    NoCrossing(String),

    #[error("hypotheses not verified: {}", .0.join(", "))]
    Hypothesis(Vec<String>),

    #[error("indeterminate profile: {0}")]
    Indeterminate(String),

    #[error("C_psi is only a limsup here; the liminf-max formula needs it to be a limit and this cannot be dropped ({0})")]
    LimitFlagMissing(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("truncation tail too large: {0}")]
    TailTooLarge(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
