use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("CFL violation at step {step} (t = {t}): dt = {dt} exceeds limit {limit}")]
    CflViolation {
        step: usize,
        t: f64,
        dt: f64,
        limit: f64,
    },

    #[error("non-finite coefficient encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("time {t} outside trajectory range [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("test-function support reaches {lower}, below grid resolution {dx}")]
    UnresolvedSupport { lower: f64, dx: f64 },

    #[error("invalid time density: {0}")]
    BadDensity(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("malformed snapshot: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
