use thiserror::Error;

use crate::expr::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval: lower endpoint {lo} exceeds upper endpoint {hi}")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point {point:?} is infeasible (max constraint value {violation:e})")]
    Infeasible { point: Vec<f64>, violation: f64 },

    #[error("objective {objective}: lower endpoint {lower} exceeds upper endpoint {upper} at {point:?}")]
    IvfViolation {
        objective: usize,
        point: Vec<f64>,
        lower: f64,
        upper: f64,
    },

    #[error("grid of {points} points exceeds the cap of {cap}")]
    GridTooLarge { points: f64, cap: usize },

    #[error("grid search is limited to dimension 4, got {0}")]
    DimensionTooHigh(usize),

    #[error("premise violated: {what}")]
    PremiseViolated {
        what: String,
        witness: Option<Vec<f64>>,
    },

    #[error("empty feasible grid")]
    EmptyFeasibleGrid,

    #[error("post-hoc verification failed: {0}")]
    Verification(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("schema error in {path}: {source}")]
    Schema {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn premise(what: impl Into<String>, witness: Option<Vec<f64>>) -> Self {
        Error::PremiseViolated {
            what: what.into(),
            witness,
        }
    }
}
