use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, configuration, or input files; exit status 2.
    #[error("{0}")]
    Usage(String),
    /// Numerical or I/O failure; exit status 1.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Runtime(_) => "runtime",
        }
    }
}

impl From<swnoon_core::error::Error> for CliError {
    fn from(e: swnoon_core::error::Error) -> Self {
        use swnoon_core::error::Error as E;
        match e {
            E::InvalidOrder(_) | E::UnknownTransition(_) | E::InvalidParameter { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
