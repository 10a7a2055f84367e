use thiserror::Error;

use crate::sim::Trace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid robot parameters: {0}")]
    InvalidParams(String),

    #[error("mass matrix is numerically singular (reciprocal condition {rcond:e})")]
    SingularMass { rcond: f64 },

    /// The integrator produced NaN/Inf. `partial` holds every row recorded
    /// before divergence when the failure happened inside a full run.
    #[error("state became non-finite at t = {t} s")]
    NonFiniteState {
        t: f64,
        partial: Option<Box<Trace>>,
    },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("trace is empty")]
    EmptyTrace,

    #[error("traces have different time grids ({0})")]
    GridMismatch(String),

    #[error("comparison needs at least two traces, got {0}")]
    TooFewTraces(usize),
}
