//! Error types shared by all solvers in this crate.

use thiserror::Error;

/// Errors produced by parameter validation and the numerical solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Newton iteration diverged after {iterations} iterations (residual {residual:.3e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("domain too short: boundary mismatch {mismatch:.3e} exceeds {tolerance:.3e}; increase the half-length L")]
    DomainTooShort { mismatch: f64, tolerance: f64 },

    #[error("amplitude too large: continuation stalled at eps = {max_converged:.4e} (target {target:.4e})")]
    AmplitudeTooLarge { target: f64, max_converged: f64 },

    #[error("far-field mismatch {mismatch:.3e} exceeds {tolerance:.3e}")]
    FarFieldMismatch { mismatch: f64, tolerance: f64 },

    #[error("oscillatory regime: T+1 - 8*sqrt(T+1)*delta = {discriminant:.3e} < 0, linearized rates are complex")]
    ComplexRates { discriminant: f64 },

    #[error("tail not resolved: {0}")]
    TailUnresolved(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("linear system singular or near-singular (pivot ratio {pivot_ratio:.3e})")]
    SingularSystem { pivot_ratio: f64 },

    #[error("fixed-point iteration not contracting: ratios {ratios:?}")]
    NotContracting { ratios: Vec<f64> },

    #[error("positivity lost at t = {t:.6}: min v = {min_v:.3e} at node {node}")]
    PositivityLost { t: f64, min_v: f64, node: usize },

    #[error("time step {dt:.3e} exceeds the stability budget {budget:.3e}")]
    CflViolation { dt: f64, budget: f64 },

    #[error("perturbation does not fit in the domain: {0}")]
    PerturbationTooWide(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
