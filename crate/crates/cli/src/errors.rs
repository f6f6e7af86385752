use thiserror::Error;

/// Exit-code policy: 0 success, 1 numerical or verification failure,
/// 2 usage or I/O error.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<ulb_core::Error> for CliError {
    fn from(e: ulb_core::Error) -> Self {
        use ulb_core::Error as E;
        match e {
            E::InvalidArgument(_) | E::OutOfDomain { .. } | E::GridMismatch(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
