use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("graph contains a cycle")]
    Cycle,

    #[error("arity mismatch: expected {expected} inputs, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("empty sample")]
    EmptySample,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("model fit failed: {0}")]
    FitFailed(String),

    #[error("mechanism `{mechanism}` cannot be applied to node {node}: {reason}")]
    Mechanism {
        mechanism: &'static str,
        node: usize,
        reason: String,
    },

    #[error("time {t} is outside the drift window [{start}, {end})")]
    Window { t: u64, start: u64, end: u64 },

    #[error("unknown snapshot `{0}`")]
    UnknownSnapshot(String),

    #[error("invalid drift schedule: {0}")]
    Schedule(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing value for node {0}")]
    MissingValue(usize),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("unknown learner `{0}`")]
    UnknownLearner(String),

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("malformed csv: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for errors caused by the filesystem rather than by inputs.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        if err.is_io_error() {
            match err.into_kind() {
                csv::ErrorKind::Io(io) => Error::Io(io),
                other => Error::Csv(format!("{other:?}")),
            }
        } else {
            Error::Csv(err.to_string())
        }
    }
}
