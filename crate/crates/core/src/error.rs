use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("fields live on different grids ({left} vs {right} modes)")]
    GridMismatch { left: usize, right: usize },

    #[error("invalid grid size {0}: need an even number of modes >= 2")]
    InvalidGrid(usize),

    #[error("inconsistent splitting scheme: {0}")]
    InconsistentScheme(String),

    #[error("unknown preset or scheme name `{0}`")]
    UnknownName(String),

    #[error("time grid must start at 0 and be strictly increasing (violated at index {0})")]
    NonMonotoneTimes(usize),

    #[error(
        "fixed-point iteration did not contract at step {step}: {iters} iterations, last distance {distance:e}"
    )]
    NonContractive {
        step: usize,
        iters: usize,
        distance: f64,
    },

    #[error("curvature {kappa:e} at node {index} is below the Frenet threshold")]
    VanishingCurvature { index: usize, kappa: f64 },

    #[error("tangent field is not orthogonal to the plane normal (max |<T,b>| = {0:e})")]
    NotFlat(f64),

    #[error("tangent field is not unit length (max deviation {0:e})")]
    NonUnitTangent(f64),

    #[error("unsupported number of Gauss nodes: {0}")]
    UnsupportedNodes(usize),

    #[error("unsupported Magnus order {0} (expected 2 or 4)")]
    UnsupportedOrder(usize),

    #[error("expected {expected} node values, got {actual}")]
    NodeCountMismatch { expected: usize, actual: usize },

    #[error("non-positive value in convergence data at index {0}")]
    NonPositive(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
