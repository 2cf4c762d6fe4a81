use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(khm_core::Error),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("invariant violated: {}", .0.join("; "))]
    Invariant(Vec<String>),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Io(_) => 1,
            HarnessError::Config(_) => 2,
            HarnessError::Numerical(_) => 3,
            HarnessError::Invariant(_) => 4,
        }
    }
}

impl From<khm_core::Error> for HarnessError {
    fn from(e: khm_core::Error) -> Self {
        use khm_core::Error as E;
        match e {
            E::Io(_) | E::Format(_) => HarnessError::Io(e.to_string()),
            E::InvalidInput(_) | E::UnresolvedSupport { .. } | E::BadDensity(_) | E::OutOfRange { .. } => {
                HarnessError::Config(e.to_string())
            }
            E::CflViolation { .. } | E::NonFinite { .. } | E::DegenerateData(_) => HarnessError::Numerical(e),
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
