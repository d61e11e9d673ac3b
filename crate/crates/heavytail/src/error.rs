//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by estimators, fixtures, and file loaders.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty candidate set")]
    EmptyCandidateSet,

    #[error("invalid metric value: distance({i},{j}) = {value}")]
    InvalidMetricValue { i: usize, j: usize, value: f64 },

    #[error("more groups than samples: k = {k}, n = {n}")]
    MoreGroupsThanSamples { k: usize, n: usize },

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Weiszfeld iteration ran out of budget; carries the best iterate seen.
    #[error("geometric median did not converge after {iterations} iterations (objective {objective})")]
    NoConvergence {
        iterations: usize,
        best: Vec<f64>,
        objective: f64,
    },

    /// Coordinate descent ran out of budget; carries the last iterate and its
    /// stationarity gap.
    #[error("lasso did not converge after {iterations} iterations (KKT gap {kkt_gap})")]
    LassoNoConvergence {
        iterations: usize,
        iterate: Vec<f64>,
        kkt_gap: f64,
    },

    #[error("mean undefined: centered Pareto requires shape > 1 (got {shape})")]
    MeanUndefined { shape: f64 },

    #[error("gamma search supported only at desk scale: {0}")]
    DeskScaleGuard(String),

    #[error("RE condition fails: gamma = 0")]
    REConditionFails,

    #[error("input not PSD: eigenvalue {eigenvalue} below tolerance")]
    NotPsd { eigenvalue: f64 },

    #[error("missing truth: dataset carries no ground-truth fields")]
    MissingTruth,

    #[error("metric validation failed: triple ({a},{b},{c}) violates the triangle inequality by {violation}")]
    TriangleViolation {
        a: usize,
        b: usize,
        c: usize,
        violation: f64,
    },

    #[error("k(1/2 + alpha) must be integral; nearest feasible k is {suggested_k}")]
    IntegralityViolation { suggested_k: usize },

    #[error("invalid config at line {line}, field `{field}`: {message}")]
    InvalidConfig {
        line: usize,
        field: String,
        message: String,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
