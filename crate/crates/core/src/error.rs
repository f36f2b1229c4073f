use std::path::PathBuf;

use thiserror::Error;

/// Domain failures of the exact channel and rate formulas.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("coincident positions: channel gain is unbounded")]
    CoincidentPositions,
    #[error("squared distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("schedule has {got} slots but the scenario has {expected}")]
    SlotCountMismatch { expected: usize, got: usize },
}

/// Failures while building a convex subproblem.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("expansion point is degenerate: {0}")]
    DegenerateExpansion(String),
    #[error("iterate violates its invariants: {0}")]
    InvalidIterate(String),
    #[error("program is malformed: {0}")]
    MalformedProgram(String),
}

/// Failures of the iterative optimizer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScaError {
    #[error("scenario is invalid: {0}")]
    InvalidScenario(String),
    #[error("infeasible at initialization: {0}")]
    InfeasibleAtInitialization(String),
    #[error("subproblem solution is not usable (status {0})")]
    NotOptimal(String),
    #[error("numerical failure in the first subproblem: {0}")]
    NumericalFailure(String),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Failures while reading a scenario description.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("scenario rejected with {} violation(s): {}", .0.len(), .0.join("; "))]
    Invalid(Vec<String>),
}

/// Failures while writing or re-reading emitted artifacts.
#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot read {path}: {reason}")]
    Read { path: PathBuf, reason: String },
}
