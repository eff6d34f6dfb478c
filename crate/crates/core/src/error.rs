use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cannot project the origin onto the sphere")]
    ZeroVector,
    #[error("point at distance {distance} is outside the tube of radius {radius}")]
    OutsideTube { distance: f64, radius: f64 },
    #[error("sublevel set is empty")]
    InfeasibleSet,
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("prox-linear model requires composite structure")]
    MissingCompositeStructure,
    #[error("clipped model requires an objective bounded below by zero")]
    ClippingUnavailable,
    #[error("basepoint is not in the constraint set (violation {0:e})")]
    InfeasibleBasepoint(f64),
    #[error("point is not in the approximating set (violation {0:e})")]
    OutsideApprox(f64),
    #[error("point is farther than {radius} from the basepoint")]
    OutsideRadius { radius: f64 },
    #[error("no strictly feasible point found for the inner approximation")]
    NoSlaterPoint,
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("t* weights are invalid: every beta must exceed gamma = {gamma}")]
    InvalidWeights { gamma: f64 },
    #[error("invalid constants: {0}")]
    InvalidConstants(String),
    #[error("oracle does not support dimension {0}")]
    UnsupportedDimension(usize),
    #[error("unknown problem {0:?}")]
    UnknownProblem(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("lagrangian is not positive definite at multiplier {0:e}")]
    IndefiniteLagrangian(f64),
}
