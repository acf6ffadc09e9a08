use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Io(String),

    #[error("{0}")]
    Numeric(#[from] spps::Error),

    /// A check requested on the command line did not hold.
    #[error("{0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Numeric(e) if is_input_error(e) => 1,
            CliError::Numeric(_) | CliError::Check(_) => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Numeric(e) if is_input_error(e) => "config",
            CliError::Numeric(_) => "numeric",
            CliError::Check(_) => "check",
        }
    }
}

fn is_input_error(e: &spps::Error) -> bool {
    matches!(
        e,
        spps::Error::InvalidGrid(_)
            | spps::Error::InvalidArgument(_)
            | spps::Error::GridMismatch
            | spps::Error::NonUnitP
            | spps::Error::DirichletLeft
    )
}

pub type CliResult<T> = std::result::Result<T, CliError>;
