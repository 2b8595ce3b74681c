use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    SelfLoop { kind: &'static str, vertex: usize },
    Overlap { u: usize, v: usize },
    DanglingEndpoint { kind: &'static str, vertex: usize },
    Duplicate { kind: &'static str, u: usize, v: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SelfLoop { kind, vertex } => {
                write!(f, "self-loop {kind} ({vertex},{vertex})")
            }
            Violation::Overlap { u, v } => write!(f, "edge ({u},{v}) is both conflict and stitch"),
            Violation::DanglingEndpoint { kind, vertex } => {
                write!(f, "{kind} edge references unknown vertex {vertex}")
            }
            Violation::Duplicate { kind, u, v } => write!(f, "duplicate {kind} edge ({u},{v})"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid graph: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidGraph(Vec<Violation>),

    #[error("component has {vertices} vertices, limit is {limit}")]
    SizeLimit { vertices: usize, limit: usize },

    #[error("graph is disconnected")]
    Disconnected,

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
