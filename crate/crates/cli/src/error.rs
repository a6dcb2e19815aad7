use thiserror::Error;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<qaum::Error> for CliError {
    fn from(e: qaum::Error) -> Self {
        use qaum::Error as E;
        match e {
            E::Config(_) | E::Structure(_) | E::Usage(_) => CliError::Config(e.to_string()),
            E::Parse { .. } | E::Format { .. } | E::DegenerateScale { .. } | E::Io { .. } => CliError::Data(e.to_string()),
            E::Numeric(_) => CliError::Numeric(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
