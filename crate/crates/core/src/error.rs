use thiserror::Error;

use crate::network::Violation;

pub type Result<T> = std::result::Result<T, BnError>;

#[derive(Debug, Error)]
pub enum BnError {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid network: {}", format_violations(.0))]
    Validation(Vec<Violation>),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("cycle detected: {0}")]
    Cycle(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("unknown state `{state}` for node `{node}`")]
    UnknownState { node: String, state: String },

    #[error("evidence has probability zero{}", context_suffix(.0))]
    ImpossibleEvidence(String),

    #[error("joint state space of {size} configurations exceeds cap {cap}")]
    Capacity { size: u128, cap: u128 },

    #[error("evidential integration stuck at node `{node}`: {reason}")]
    Integration { node: String, reason: String },

    #[error("inconsistent state at node `{0}`: every Markov-blanket score is zero")]
    InconsistentState(String),

    #[error("Gibbs initialization failed after {0} attempts")]
    Initialization(usize),

    #[error("estimate is undefined: {0}")]
    UndefinedEstimate(String),

    #[error("non-positive error value {0} cannot be log-transformed")]
    UndefinedLog(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

fn context_suffix(s: &str) -> String {
    if s.is_empty() {
        String::new()
    } else {
        format!(" ({s})")
    }
}
