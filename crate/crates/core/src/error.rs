use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown catalog metric `{0}`")]
    UnknownCatalog(String),
    #[error("parameter `{name}` = {value} out of range: {reason}")]
    ParameterOutOfRange {
        name: String,
        value: f64,
        reason: String,
    },
    #[error("config parse error at line {line}, column {column}: {message}")]
    Config {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("expression for `{key}`, column {column}: {message}")]
    Expression {
        key: String,
        column: usize,
        message: String,
    },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("signature mismatch at {point:?}: declared ({0}-, {1}+), found ({2}-, {3}+)", .declared.0, .declared.1, .found.0, .found.1)]
    SignatureMismatch {
        point: Vec<f64>,
        declared: (usize, usize),
        found: (usize, usize),
    },
    #[error("asymmetric components G_{i}{j} / G_{j}{i}: difference {diff:e}")]
    AsymmetricComponents { i: usize, j: usize, diff: f64 },
    #[error("point {0:?} outside the metric domain")]
    OutsideDomain(Vec<f64>),
    #[error("singular metric at {point:?} (det = {det:e})")]
    SingularMetric { point: Vec<f64>, det: f64 },
    #[error("finite-difference stencil leaves the domain around {0:?}")]
    StencilOutsideDomain(Vec<f64>),
    #[error("dual-forward differentiation needs an expression-backed field")]
    DualUnavailable,
    #[error("geodesic left the domain at t = {t}")]
    DomainExit { t: f64 },
    #[error("adaptive step underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("conjugate point at t = {t} before the end of the geodesic")]
    ConjugatePoint { t: f64 },
    #[error("target lies beyond the first conjugate point (conjugate at {conjugate}, target distance {distance})")]
    BeyondConjugate { conjugate: f64, distance: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("{op} needs dimension >= {min}, got {n}")]
    DimensionTooSmall {
        op: &'static str,
        n: usize,
        min: usize,
    },
    #[error("conformal factor exp(-2 sigma) = {0} is not positive: outside the validity region")]
    NonPositiveFactor(f64),
    #[error("stereographic map undefined at r sqrt(K) = {0} (>= pi)")]
    StereographicBlowup(f64),
    #[error("metrics are not conformally related at the point (mismatch {0:e})")]
    NotConformallyRelated(f64),
    #[error("point is off the hypersurface (constraint residual {0:e})")]
    OffSurface(f64),
    #[error("expansion order {0} unsupported (use 2 or 3)")]
    UnsupportedOrder(u32),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("residual underflow: observed order indeterminate")]
    ResidualUnderflow,
}
