use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("graph is disconnected; one vertex per component: {witnesses:?}")]
    Disconnected { witnesses: Vec<usize> },

    #[error("not a metric: {0}")]
    NotMetric(String),

    #[error("structural violation: {0}")]
    Structure(String),

    #[error("enumeration needs about {needed} branches but the budget is {budget}")]
    Budget { needed: f64, budget: u64 },

    #[error("linear program: {0}")]
    Lp(#[from] crate::lp::LpError),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}
