use framelab::LabError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error(transparent)]
    Lab(#[from] LabError),
}

impl CliError {
    /// 0 ok, 1 i/o, 2 config or invalid parameter, 3 resource limit,
    /// 4 numerical invariant or degenerate input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) | CliError::Lab(LabError::InvalidInput(_)) => 2,
            CliError::Lab(LabError::ResourceLimit { .. }) => 3,
            CliError::Lab(LabError::InvariantViolation(_) | LabError::Degenerate { .. }) => 4,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
