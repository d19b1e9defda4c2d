use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no observations")]
    NoObservations,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid delta at position {index}: {value} (must be finite and non-negative)")]
    InvalidDelta { index: usize, value: f64 },

    #[error("order must be at least 1, got {0}")]
    InvalidOrder(usize),

    #[error("{groups} complete group(s) of size {order}; at least {required} are required")]
    TooFewGroups {
        groups: usize,
        order: usize,
        required: usize,
    },

    #[error("subgroup {group} has zero total time, so s_1 = 0")]
    EmptySubgroup { group: usize },

    #[error("cumulative times must be finite, positive and non-decreasing (index {index})")]
    NonIncreasingTimes { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time must be finite and non-negative, got {0}")]
    InvalidTime(f64),

    #[error("overflow evaluating {0}")]
    Overflow(&'static str),

    #[error(
        "no sign change of the profile score in b ∈ [{lo:e}, {hi:e}]; model may not fit this data"
    )]
    NoSignChange { lo: f64, hi: f64 },

    #[error("no interior maximum of the profile likelihood in b ∈ [{lo:e}, {hi:e}]; model may not fit this data")]
    NoInteriorMaximum { lo: f64, hi: f64 },

    #[error("order mismatch: data grouped with r={data}, model has r={model}")]
    OrderMismatch { data: usize, model: usize },

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
