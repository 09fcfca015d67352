//! Process-level error classification. Configuration problems (unreadable
//! or invalid config, bad flag combinations, malformed snapshot files) exit
//! with code 2; computations that start but fail (blow-up, eigensolver
//! breakdown, non-convergent fits) exit with code 3.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<kgz::Error> for CliError {
    fn from(err: kgz::Error) -> Self {
        match &err {
            kgz::Error::BlowUp { .. }
            | kgz::Error::Aborted { .. }
            | kgz::Error::Eigensolver(_)
            | kgz::Error::NoConvergence { .. } => CliError::Numerical(err.to_string()),
            _ => CliError::Config(err.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Config(format!("i/o failure: {err}"))
    }
}
