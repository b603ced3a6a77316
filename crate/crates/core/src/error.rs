use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("message {message} has zero marginal probability")]
    ZeroProbabilityMessage { message: usize },

    #[error("obedient receiver needs one message per action ({messages} messages, {actions} actions)")]
    MessageNotAnAction { messages: usize, actions: usize },

    #[error("schema error at {location}: {detail}")]
    Schema { location: String, detail: String },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("enumeration of {count} schemes exceeds the cap of {cap}")]
    EnumerationTooLarge { count: u128, cap: u128 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("fold {fold} of {folds} would be empty with {items} items")]
    InsufficientItems { items: usize, folds: usize, fold: usize },

    #[error("best-response dynamics did not converge within {max_rounds} rounds")]
    NotConverged { max_rounds: usize },

    #[error("feature pair ({x_a}, {x_b}) has zero probability")]
    ZeroProbabilityFeatures { x_a: usize, x_b: usize },

    #[error("subset space 2^{size} exceeds the exhaustive cap 2^{cap}")]
    SubsetSpaceTooLarge { size: usize, cap: usize },

    #[error("rule produced a message of length {got}, expected {expected}")]
    RuleDimensionMismatch { expected: usize, got: usize },

    #[error("unknown fixture {0:?}")]
    UnknownFixture(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn schema(location: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Schema {
            location: location.into(),
            detail: detail.into(),
        }
    }
}
