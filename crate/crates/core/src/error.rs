use thiserror::Error;

use crate::market::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("foreign doctor: d#{doctor} is outside the ground set of {context}")]
    ForeignDoctor { doctor: usize, context: &'static str },

    /// An exhaustive oracle was asked to enumerate more than its cap allows.
    #[error("exhaustive limit exceeded in {module}: {what} is {size}, limit {limit}")]
    LimitExceeded {
        module: &'static str,
        what: &'static str,
        size: u64,
        limit: u64,
    },

    #[error("invalid market: {}", join_violations(.0))]
    InvalidMarket(Vec<Violation>),

    #[error("invalid matching: {0}")]
    InvalidMatching(String),

    #[error("infeasible matching: assigned set of hospital #{hospital} is not independent")]
    InfeasibleMatching { hospital: usize },

    #[error("candidate set is not independent in the packing instance")]
    InfeasibleCandidate,

    #[error("unsupported utility class for {algorithm}: {utility}")]
    UnsupportedUtility {
        algorithm: &'static str,
        utility: &'static str,
    },

    #[error("unsupported constraint class for {algorithm}: {constraint}")]
    UnsupportedConstraint {
        algorithm: &'static str,
        constraint: &'static str,
    },

    #[error("doctor d#{doctor} arrived twice")]
    RepeatedArrival { doctor: usize },

    #[error("contract violation by online algorithm of hospital #{hospital} in round {round}: {detail}")]
    ContractViolation {
        hospital: usize,
        round: usize,
        detail: String,
    },

    #[error("alpha must be a finite real >= 1, got {0}")]
    InvalidAlpha(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("lower-bound inequality fails for {set:?}: alpha*u = {lhs} is not below {rhs}")]
    LowerBoundViolated { set: Vec<usize>, lhs: f64, rhs: f64 },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn is_limit(&self) -> bool {
        matches!(self, Error::LimitExceeded { .. })
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
