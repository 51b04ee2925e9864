use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("chart must have 2 or 3 axes, got {0}")]
    ChartDimension(usize),
    #[error("axis {axis} has non-positive or non-finite length ({lo}, {hi})")]
    DegenerateAxis { axis: usize, lo: f64, hi: f64 },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("field has arity {found}, expected {expected}")]
    WrongArity {
        expected: &'static str,
        found: String,
    },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("singular metric (determinant {det:e})")]
    SingularMetric { det: f64 },
    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("field supplies no analytic partial along axis {axis}")]
    MissingAnalyticPartial { axis: usize },
    #[error("finite-difference stencil along axis {axis} leaves the chart at x = {coordinate}")]
    StencilOutsideDomain { axis: usize, coordinate: f64 },
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("epsilon must be strictly positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("fiber volume must be strictly positive, got {0}")]
    NonPositiveFiberVolume(f64),
    #[error("lowered spin connection violates antisymmetry by {0:e}")]
    AntisymmetryViolation(f64),
    #[error("invalid quadrature: {0}")]
    InvalidQuadrature(String),
    #[error("epsilon grid needs at least 3 distinct positive values, got {0}")]
    DegenerateGrid(usize),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("unknown export format `{0}`")]
    UnknownFormat(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("malformed record: {0}")]
    Record(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
