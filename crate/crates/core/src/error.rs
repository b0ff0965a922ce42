use thiserror::Error;

use crate::model::EdgeId;

/// Why a colored subproblem admits no spanning tree.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Infeasibility {
    #[error("blue edges close a cycle at edge {0}")]
    BlueCycle(EdgeId),
    #[error("removing red edges disconnects the graph")]
    Disconnected,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Input(String),
    /// An operation was called outside its domain of validity, e.g. a
    /// convexity-based test with non-monotonic weights.
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Infeasible(#[from] Infeasibility),
    #[error("{0}")]
    Validation(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    /// Short stable tag for machine-readable reporting.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Input(_) => "input",
            Error::Usage(_) => "usage",
            Error::Infeasible(_) => "infeasible",
            Error::Validation(_) => "validation",
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
