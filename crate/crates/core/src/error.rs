use thiserror::Error;

use crate::model::NodeId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("scenario error at `{path}`: {msg}")]
    Scenario { path: String, msg: String },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("infeasible flow: {0}")]
    InfeasibleFlow(String),

    #[error("invalid dynamic flow: {0}")]
    InvalidFlow(String),

    #[error("schedule violation in round {round}: {msg}")]
    Schedule { round: u32, msg: String },

    #[error("operand width mismatch: expected {expected} bits, got {got}")]
    WidthMismatch { expected: usize, got: usize },

    #[error("unknown operator `{0}`")]
    UnknownOperator(String),

    #[error("operator law violated: {0}")]
    LawViolation(String),

    #[error("node {0} has no data for {1}")]
    MissingData(NodeId, String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGraph(_) => "invalid_graph",
            Error::Scenario { .. } => "scenario",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::InfeasibleFlow(_) => "infeasible_flow",
            Error::InvalidFlow(_) => "invalid_flow",
            Error::Schedule { .. } => "schedule",
            Error::WidthMismatch { .. } => "width_mismatch",
            Error::UnknownOperator(_) => "unknown_operator",
            Error::LawViolation(_) => "law_violation",
            Error::MissingData(..) => "missing_data",
            Error::Unsupported(_) => "unsupported",
        }
    }

    pub(crate) fn schedule(round: u32, msg: impl Into<String>) -> Self {
        Error::Schedule {
            round,
            msg: msg.into(),
        }
    }

    pub(crate) fn scenario(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Scenario {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
