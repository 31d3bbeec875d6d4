use std::fmt;

use seqfit::Error;

/// Failure classes, each mapped to a process exit code.
#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Config(String),
    Solver(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 1,
            CliError::Config(_) => 2,
            CliError::Solver(_) | CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::ShapeMismatch { .. }
            | Error::OutsideDomain { .. }
            | Error::InvalidParameter(_)
            | Error::NotPositiveDefinite { .. } => CliError::Config(e.to_string()),
            Error::IllConditioned { .. } | Error::BudgetExhausted { .. } | Error::Internal(_) => {
                CliError::Solver(e.to_string())
            }
        }
    }
}
