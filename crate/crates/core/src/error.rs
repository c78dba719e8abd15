use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid measurement axis ({x}, {y}, {z}): norm {norm} is not 1 within 1e-9")]
    InvalidAxis { x: f64, y: f64, z: f64, norm: f64 },
    #[error("invalid state ({x}, {y}, {z}): norm {norm} exceeds 1")]
    InvalidState { x: f64, y: f64, z: f64, norm: f64 },
    #[error("invalid outcome {0}: expected 0 or 1")]
    InvalidOutcome(u8),
    #[error("cannot condition on an outcome of probability {0}")]
    NullEvent(f64),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
