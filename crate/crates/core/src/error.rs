use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// Variants are grouped so a front end can map them onto stable exit codes
/// (see [`Error::code`]).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("prime table exhausted: {0}")]
    PrimeTableExhausted(String),

    #[error("unattainable tolerance: {0}")]
    Unattainable(String),

    #[error("budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("symbol cannot be evaluated at {at}: {reason}")]
    NotEvaluable { at: String, reason: String },

    #[error("operation not supported by symbol kind `{kind}`: {what}")]
    Unsupported { kind: String, what: String },

    #[error("uncertified comparison: {0}")]
    Uncertified(String),
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Overflow(_) => "overflow",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::MalformedInput(_) => "malformed_input",
            Error::PrimeTableExhausted(_) => "prime_table_exhausted",
            Error::Unattainable(_) => "unattainable_tolerance",
            Error::BudgetExhausted(_) => "budget_exhausted",
            Error::NotEvaluable { .. } => "not_evaluable",
            Error::Unsupported { .. } => "unsupported",
            Error::Uncertified(_) => "uncertified_comparison",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn malformed(msg: impl Into<String>) -> Self {
        Error::MalformedInput(msg.into())
    }

    pub(crate) fn overflow(msg: impl Into<String>) -> Self {
        Error::Overflow(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
