use thiserror::Error;

/// Errors produced by the toolkit.
///
/// The CLI maps these onto its exit-code contract: input/precondition
/// problems exit 3, accuracy/convergence problems exit 4, failed
/// inequality assertions exit 2.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("point outside domain: {0}")]
    OutsideDomain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("not harmonic: laplacian coefficient residual {residual:.3e} exceeds 1e-12 of the largest coefficient")]
    NotHarmonic { residual: f64 },

    #[error("orientation/degeneracy: jacobian {jacobian:.6e} at point {point}")]
    NonPositiveJacobian { jacobian: f64, point: String },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("range violation: {0}")]
    Range(String),

    #[error("capability: {0}")]
    Capability(String),

    #[error("accuracy: {0}")]
    Accuracy(String),

    #[error("precondition: {0}")]
    Precondition(String),

    #[error("singularity: {0}")]
    Singularity(String),

    #[error("resolution: {0}")]
    Resolution(String),

    #[error("connectivity: {0}")]
    Connectivity(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
