use thiserror::Error;

/// Campaign failure, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<tbench_core::Error> for CliError {
    fn from(e: tbench_core::Error) -> Self {
        use tbench_core::Error as E;
        match e {
            E::InvalidArgument { .. } | E::LengthMismatch { .. } | E::NoCandidates => CliError::Config(e.to_string()),
            E::EmptySamples | E::BracketExhausted { .. } | E::Numerical(_) => CliError::Numerical(e.to_string()),
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
