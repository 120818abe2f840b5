use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("{0}")]
    Core(nilpw_core::Error),

    #[error("io: {0}")]
    Io(String),

    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize },
}

impl From<nilpw_core::Error> for CliError {
    fn from(e: nilpw_core::Error) -> Self {
        match e {
            nilpw_core::Error::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Core(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    /// 0 success, 1 validation error, 2 numerical check failure, 3 I/O error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Core(_) => 1,
            CliError::ChecksFailed { .. } => 2,
            CliError::Io(_) => 3,
        }
    }
}
