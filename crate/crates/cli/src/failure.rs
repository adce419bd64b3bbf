use std::fmt;

use grushin_core::Error;

/// Anything that stops a run, with its process exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Io(String),
    Core(Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Io(_) => 3,
            Failure::Core(e) => match e {
                Error::NonPositiveAlpha(_)
                | Error::NonPositiveMeasureConstant(_)
                | Error::NonPositivePeriod(_)
                | Error::InvalidDimension
                | Error::MeasureExponentNonIntegrable { .. }
                | Error::SingularAxis
                | Error::NonPositiveScale(_)
                | Error::InvalidInput(_) => 4,
                Error::GridTooCoarse { .. } | Error::NoConvergence(_) => 5,
                Error::TruncationTooSmall { .. } | Error::EigenSolveFailure(_) => 6,
                Error::TailDominates { .. } | Error::QuadratureFailure(_) => 7,
                Error::NoPlateau { .. } => 8,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Failure::Config(_) => "config",
            Failure::Io(_) => "io",
            Failure::Core(_) => "numerical",
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) | Failure::Io(m) => f.write_str(m),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.to_string())
    }
}
