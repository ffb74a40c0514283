use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: row {row} has {len} entries, expected {n}")]
    NonSquare { row: usize, len: usize, n: usize },
    #[error("negative weight {value} at ({row}, {col})")]
    NegativeWeight { row: usize, col: usize, value: f64 },
    #[error("weight {value} at ({row}, {col}) exceeds 1")]
    WeightAboveOne { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to {sum}")]
    RowSumViolation { row: usize, sum: f64 },
    #[error("non-finite weight at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("empty network")]
    Empty,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("belief {value} of agent {agent} outside [0, 1]")]
    BeliefOutOfRange { agent: usize, value: f64 },
    #[error("parameter {name} = {value} outside [0, 1]")]
    ParameterOutOfRange { name: &'static str, value: f64 },
    #[error("bias spec mode mismatch: {0}")]
    ModeMismatch(String),
    #[error("network is not strongly connected and aperiodic")]
    NotErgodic,
    #[error("power iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("no convergence within {horizon} periods")]
    ExceededHorizon { horizon: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("shape mismatch: {0} vs {1}")]
    ShapeMismatch(usize, usize),
    #[error("no strongly connected network after {attempts} attempts")]
    GenerationFailed { attempts: usize },
    #[error("no agent or compatible pair sits at the mean belief")]
    NoCenterPair,
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("bad degree {d} for n = {n}")]
    BadDegree { n: usize, d: usize },
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("row must be nonnegative and sum to 1")]
    BadRow,
    #[error("number of media organizations must be at least 1")]
    BadM,
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
