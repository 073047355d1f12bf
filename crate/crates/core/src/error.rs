use thiserror::Error;

use crate::colouring::Contradiction;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("depth mismatch: expected {expected}, got {got}")]
    DepthMismatch { expected: u32, got: u32 },

    #[error("cylinder depth {0} has no shift information")]
    NoShift(u32),

    #[error("{what} overflows the supported range")]
    Overflow { what: String },

    #[error("enumeration at depth {depth} exceeds the cap of {cap}; {hint}")]
    CapExceeded { depth: u32, cap: u32, hint: &'static str },

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("parity contradiction while extending colouring")]
    Contradiction(Box<Contradiction>),

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
