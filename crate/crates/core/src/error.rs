use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DwdgError {
    #[error("mesh level must be at least 1")]
    InvalidLevel,

    #[error("no {kind} quadrature rule of degree {degree}")]
    UnsupportedQuadrature { kind: &'static str, degree: usize },

    #[error("triangle index {index} out of range ({count} triangles)")]
    TriangleOutOfRange { index: usize, count: usize },

    #[error("point ({x}, {y}) does not lie on edge {edge}")]
    PointNotOnEdge { edge: usize, x: f64, y: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("the bilinear form requires lifting operators with zero boundary traces")]
    LiftingNotBoundaryZero,

    #[error("energy norm squared is negative ({value:.3e}); penalty {gamma} is inadmissible")]
    InvalidPenalty { gamma: f64, value: f64 },

    #[error("factorization broke down at pivot {pivot}")]
    FactorizationBreakdown { pivot: usize },

    #[error("linear solve residual {residual:.3e} exceeds {bound:.3e}")]
    ResidualTooLarge { residual: f64, bound: f64 },

    #[error("sparse backend error: {0}")]
    Backend(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("local control problem on triangle {triangle} has no KKT pattern")]
    NoKktPattern { triangle: usize },

    #[error("active set iteration did not converge in {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("solve failed for gamma = {gamma}, N = {level}: {source}")]
    Level {
        gamma: f64,
        level: usize,
        #[source]
        source: Box<DwdgError>,
    },
}

pub type Result<T, E = DwdgError> = std::result::Result<T, E>;
