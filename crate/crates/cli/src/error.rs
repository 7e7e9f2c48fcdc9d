//! Failure categories and their exit codes.

use std::fmt;

use strutpath::analyzer::AnalyzerError;
use strutpath::gcode::GcodeError;
use strutpath::graph::GraphError;
use strutpath::lattice::LatticeError;
use strutpath::optimizer::OptimizerError;
use strutpath::stats::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Bad flag or parameter value.
    Usage,
    /// Missing, unreadable or malformed input.
    Input,
    /// Broken internal invariant.
    Internal,
}

impl Kind {
    pub fn exit_code(self) -> u8 {
        match self {
            Kind::Usage => 2,
            Kind::Input => 3,
            Kind::Internal => 4,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub source: anyhow::Error,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.source)
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage(e: impl Into<anyhow::Error>) -> CliError {
    CliError { kind: Kind::Usage, source: e.into() }
}

pub fn input(e: impl Into<anyhow::Error>) -> CliError {
    CliError { kind: Kind::Input, source: e.into() }
}

pub fn internal(e: impl Into<anyhow::Error>) -> CliError {
    CliError { kind: Kind::Internal, source: e.into() }
}

/// Attach context while keeping the failure category.
pub trait Context<T> {
    fn context(self, msg: impl fmt::Display + Send + Sync + 'static) -> CliResult<T>;
}

impl<T, E: Into<CliError>> Context<T> for Result<T, E> {
    fn context(self, msg: impl fmt::Display + Send + Sync + 'static) -> CliResult<T> {
        self.map_err(|e| {
            let e = e.into();
            CliError { kind: e.kind, source: e.source.context(msg) }
        })
    }
}

impl From<LatticeError> for CliError {
    fn from(e: LatticeError) -> Self {
        match e {
            LatticeError::Parameter { .. } | LatticeError::Domain { .. } => usage(e),
            LatticeError::Format { .. } | LatticeError::InvalidLayer(_) | LatticeError::Io(_) => input(e),
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::Invariant(_) => internal(e),
            _ => input(e),
        }
    }
}

impl From<OptimizerError> for CliError {
    fn from(e: OptimizerError) -> Self {
        match e {
            OptimizerError::InvalidConfig(_) => usage(e),
            OptimizerError::EmptyGraph => input(e),
            OptimizerError::EmptySolution | OptimizerError::ThreadPool(_) => internal(e),
        }
    }
}

impl From<GcodeError> for CliError {
    fn from(e: GcodeError) -> Self {
        match e {
            GcodeError::Parameter { .. } => usage(e),
            GcodeError::LayerCountMismatch { .. } | GcodeError::MissingNode { .. } => input(e),
        }
    }
}

impl From<AnalyzerError> for CliError {
    fn from(e: AnalyzerError) -> Self {
        input(e)
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        input(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        input(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        input(e)
    }
}
