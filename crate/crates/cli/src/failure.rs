use std::fmt;

use bladegauge::Error;

/// Why a command stopped. Maps onto the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Bad flags, unreadable or invalid input. Exit code 2.
    Usage(String),
    /// A check failed or the computation broke down. Exit code 1.
    Check(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Check(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Parse { .. } | Error::Parameter(_) | Error::Dimension(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Check(e.to_string()),
        }
    }
}

pub type Outcome<T> = Result<T, Failure>;
