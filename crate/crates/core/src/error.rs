use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}: only 2 and 3 are supported")]
    InvalidDimension(usize),

    #[error("number of subdivisions must be positive, got {0}")]
    NonpositiveSubdivisions(usize),

    #[error("unsupported polynomial degree {0}: only 1 and 2 are supported")]
    UnsupportedDegree(usize),

    #[error("no quadrature rule of exactness degree {0} (maximum is 6)")]
    UnsupportedQuadrature(usize),

    #[error("invalid barycentric coordinates {0:?}")]
    InvalidBarycentric(Vec<f64>),

    #[error("point {0:?} lies outside the unit domain")]
    PointOutsideDomain(Vec<f64>),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("rank-1 update is singular (denominator {0:e})")]
    SingularUpdate(f64),

    #[error("functions live on different finite element spaces")]
    SpaceMismatch,

    #[error("target does not vanish on the Dirichlet boundary (|value| = {value:e} at {point:?})")]
    NonvanishingBoundary { point: Vec<f64>, value: f64 },

    #[error("SAV energy E(u) = {0:e} is not positive; increase the shift c0")]
    NonpositiveEnergy(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),
}
