use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed command line or configuration file.
    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] thermosqueeze::Error),

    #[error("cannot read configuration: {0}")]
    Config(#[from] toml::de::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// 0 success, 1 usage, 2 domain error, 3 numerical non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Core(thermosqueeze::Error::NonConvergence { .. }) => 3,
            CliError::Core(_) | CliError::Io(_) => 2,
        }
    }
}
