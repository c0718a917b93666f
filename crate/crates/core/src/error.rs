use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised across the simulator, calibrator, decoder and experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("observation kind mismatch: model expects {expected}, got {found}")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("degenerate observation model: propagated belief vanished at cycle {cycle}")]
    DegenerateObservation { cycle: usize },

    #[error("record too long for path enumeration: {len} > {max}")]
    RecordTooLong { len: usize, max: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("bin edges of the two distributions differ")]
    EdgeMismatch,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
