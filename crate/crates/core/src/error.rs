use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A numeric argument violated an operation's precondition.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Polynomial ergodicity order at or below 1/2.
    #[error("order too low for an o(1/sqrt(n)) bias guarantee: m = {m} must exceed 0.5")]
    OrderTooLow { m: f64 },

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("traces are not comparable: {0}")]
    MismatchedTraces(String),

    #[error("chain `{chain}` has no exact stationary sampler")]
    NoStationarySampler { chain: String },

    #[error("no known stationary expectation for functional `{functional}` on chain `{chain}`")]
    UnknownTruth { chain: String, functional: String },

    #[error("state {state} is outside the state space of chain `{chain}`")]
    InvalidState { chain: String, state: f64 },

    #[error("functional `{functional}` value {value} exceeds its declared bound {bound}")]
    BoundViolated {
        functional: String,
        value: f64,
        bound: f64,
    },

    #[error("plans differ in {0}; compared methods must share traces")]
    PlanMismatch(&'static str),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Checks `0 < alpha < 1`.
pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::param("alpha", format!("must lie in (0, 1), got {alpha}")))
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive and finite, got {value}")))
    }
}

pub(crate) fn check_nonnegative(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be nonnegative and finite, got {value}")))
    }
}

pub(crate) fn check_count(name: &'static str, value: u64) -> Result<()> {
    if value >= 1 {
        Ok(())
    } else {
        Err(Error::param(name, "must be at least 1"))
    }
}
