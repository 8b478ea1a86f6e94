use thiserror::Error;

/// Errors produced while building, classifying or projecting onto a quadric.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension must be at least 1")]
    EmptyDimension,

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e} exceeds {tolerance:e})")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },

    #[error("quadratic part is zero; the surface is not a quadric")]
    ZeroQuadratic,

    #[error("non-finite value in input")]
    NonFinite,

    #[error("eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("quadric is not central (the quadratic part is singular)")]
    NotCentral,

    #[error("quadric is cylindrical (rank {rank} < dimension {dim})")]
    Cylindrical { rank: usize, dim: usize },

    #[error("quadric is conical: the constant term vanishes at the center (gamma = {gamma:e})")]
    ConicalDegenerate { gamma: f64 },

    #[error("quadric is empty: no positive eigenvalue after normalization")]
    EmptyQuadric,

    #[error("evaluation at mu = {mu} hits the pole {pole}")]
    PoleEvaluation { mu: f64, pole: f64 },

    #[error("root finder exceeded {iterations} iterations")]
    MaxIterations { iterations: usize },

    #[error("hyperplane normal is zero")]
    ZeroNormal,

    #[error("oracle limited to n <= {max}, got n = {n}")]
    CostGuard { n: usize, max: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no projection candidate was produced")]
    InternalNoCandidate,
}

impl Error {
    /// True for errors that mean "this quadric is outside the supported class"
    /// as opposed to malformed input or numerical failure.
    pub fn is_unsupported_quadric(&self) -> bool {
        matches!(
            self,
            Error::NotCentral
                | Error::Cylindrical { .. }
                | Error::ConicalDegenerate { .. }
                | Error::EmptyQuadric
                | Error::Unsupported(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
