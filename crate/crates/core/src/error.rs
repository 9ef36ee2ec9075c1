use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {norm} lies outside the unit ball of the Poincaré model")]
    OutsideBall { norm: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("radial direction undefined: point coincides with the center")]
    AtCenter,

    #[error("conformal factor must be positive, got u = {0}")]
    NonPositiveFactor(f64),

    #[error("singular point: {0}")]
    Singular(String),

    #[error("point is not on the hypersurface (level value {level})")]
    NotOnSurface { level: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("hypersurface does not meet the sampled region")]
    EmptyIntersection,

    #[error("no convergence after {iterations} iterations (stationarity {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("curve entered the region where u < {floor:e}")]
    CurveCollapsed { floor: f64 },

    #[error("degenerate segment {0} of zero length")]
    DegenerateSegment(usize),

    #[error("curve is not stationary: residual {0:e}")]
    NotStationary(f64),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
}
