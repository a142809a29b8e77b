use thiserror::Error;

/// Errors raised by the geometric kernels and verification drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension {0} too small (need n+1 >= 2)")]
    DimensionTooSmall(usize),

    #[error("imaginary residue {residue:e} above tolerance {tolerance:e} in a real-valued pairing")]
    ImaginaryResidue { residue: f64, tolerance: f64 },

    #[error("ambiguous retraction: top eigenvalue gap {gap:e} below threshold {threshold:e}")]
    AmbiguousRetraction { gap: f64, threshold: f64 },

    #[error("zero vector has no projective class")]
    ZeroVector,

    #[error("tangent vectors live at different base points")]
    BaseMismatch,

    #[error("not a point of CP^n: {0}")]
    NotProjector(String),

    #[error("not a tangent vector: {0}")]
    NotTangent(String),

    #[error("not an element of su(n+1): {0}")]
    NotSu(String),

    #[error("singular metric in chart (pivot {0:e})")]
    SingularMetric(f64),

    #[error("metric is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
