use thiserror::Error;

/// Failure of a command, carrying its process exit code.
#[derive(Error, Debug)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    /// A numerical contract was violated, e.g. a gradient check failed.
    #[error("{0}")]
    Numerical(String),

    #[error("{0}")]
    Io(String),

    /// The requested quantity does not exist at this point (zero σ).
    #[error("undefined: {0}")]
    Undefined(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 1,
            Self::Numerical(_) => 2,
            Self::Io(_) => 3,
            Self::Undefined(_) => 4,
        }
    }
}

impl From<convnorm::Error> for CliError {
    fn from(e: convnorm::Error) -> Self {
        match e {
            convnorm::Error::Undefined(_) => Self::Undefined(e.to_string()),
            convnorm::Error::NonFinite(_) => Self::Numerical(e.to_string()),
            _ => Self::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Io(format!("json: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Io(format!("csv: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
