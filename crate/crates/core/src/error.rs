use thiserror::Error;

/// Errors raised by the engines and their building blocks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("system of {n_spins} spins exceeds the dense-engine cap of {cap}")]
    Capacity { n_spins: usize, cap: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("step size underflow at t = {t} (h = {step:e}); problem too stiff for the explicit integrator")]
    Stiffness { t: f64, step: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("null space of dimension > 1 detected (distance between independent solutions {separation:e})")]
    DegenerateNullSpace { separation: f64 },

    #[error("fixed-point iteration is oscillating (trace distance stalled at {distance:e})")]
    LimitCycle { distance: f64 },

    #[error("memory budget exceeded: {0}")]
    MemoryBudget(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

pub type Result<T> = std::result::Result<T, Error>;
