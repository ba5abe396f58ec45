use thiserror::Error;

/// Errors produced across the toolkit.
#[derive(Debug, Error)]
pub enum SleError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("point swallowed at capacity time {time}")]
    Swallowed { time: f64 },

    #[error("target swallowed before it was reached (capacity time {time}); retry with a finer step")]
    RetryWithRefinement { time: f64 },

    #[error("step size underflow at capacity time {time} (dt = {dt:e})")]
    StepUnderflow { time: f64, dt: f64 },

    #[error("empty ensemble ({survivors} of {total} traces survived)")]
    EmptyEnsemble { survivors: usize, total: usize },

    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    #[error("resource limit: {message}; suggested ladder floor {suggested_floor:e}")]
    ResourceLimit { message: String, suggested_floor: f64 },

    #[error("insufficient overlap: {0}")]
    InsufficientOverlap(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("convention mismatch: {0}")]
    Convention(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, SleError>;

pub(crate) fn invalid(msg: impl Into<String>) -> SleError {
    SleError::InvalidArgument(msg.into())
}
