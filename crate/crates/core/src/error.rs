use alloc::string::String;
use alloc::vec::Vec;

use crate::covering::Violation;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("infeasible configuration: {0}")]
    Infeasible(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported at scale: {0}")]
    UnsupportedAtScale(String),
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
    #[error("improving edges contain a cycle through nodes {0:?}")]
    Cycle(Vec<usize>),
    #[error("node {node}: sink = {is_sink} but local optimum = {is_local_optimum}")]
    SinkMismatch {
        node: usize,
        is_sink: bool,
        is_local_optimum: bool,
    },
    #[error("covering violation: {0}")]
    Covering(Violation),
    #[error("encoding violation: {0}")]
    Encoding(String),
    #[error("player {player}: cost change {cost_delta} but potential change {potential_delta}")]
    PotentialMismatch {
        player: usize,
        cost_delta: f64,
        potential_delta: f64,
    },
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::Error::InvalidParameter(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;
