use thiserror::Error;

use crate::vecspace::Point;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid convex set: {0}")]
    InvalidSet(String),

    #[error("Dykstra projection did not converge (feasibility residual {residual:.3e})")]
    ProjectionNotConverged { last: Point, residual: f64 },

    #[error("invalid problem parameters: {0}")]
    InvalidProblem(String),

    #[error("oracle unavailable: {0}")]
    OracleUnavailable(&'static str),

    #[error("inner solver did not converge: {what} (achieved {achieved:.3e})")]
    InnerSolve { what: &'static str, achieved: f64 },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("problem is in {actual} mode, solver needs {expected}")]
    ModeMismatch { expected: &'static str, actual: &'static str },

    #[error("negative duality gap {0:.3e}: best-response oracle is inconsistent")]
    NegativeGap(f64),

    #[error("rate fit needs at least 3 positive points: {0}")]
    InvalidFit(String),

    #[error("point is infeasible: {0}")]
    Infeasible(String),
}
