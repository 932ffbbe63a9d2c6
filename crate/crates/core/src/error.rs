use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text.
    #[error("syntax error at {location}: {message}")]
    Syntax { location: String, message: String },

    /// Well-formed input that breaks an instance invariant.
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },

    /// An exhaustive enumeration would exceed its configured budget.
    #[error("{what} needs {needed} enumeration steps, over the budget of {budget}")]
    InfeasibleScale { what: &'static str, needed: u128, budget: u128 },

    /// A search ran out of nodes before it could certify its answer.
    #[error("{what} exceeded its budget of {budget} nodes")]
    BudgetExceeded { what: &'static str, budget: u64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An internal consistency check failed; indicates a bug.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation { field: field.into(), message: message.into() }
    }

    pub(crate) fn syntax(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Syntax { location: location.into(), message: message.into() }
    }

    /// Errors that stem from the problem itself rather than from how the tool
    /// was invoked.
    pub fn is_domain_error(&self) -> bool {
        matches!(
            self,
            Error::InfeasibleScale { .. }
                | Error::BudgetExceeded { .. }
                | Error::Precondition(_)
                | Error::Invariant(_)
        )
    }
}
