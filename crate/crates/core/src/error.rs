use thiserror::Error;

/// Errors raised by the numerical core.
///
/// Node indices are the signed grid indices `j = -N+1 ..= N`.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("grid mismatch: N = {left} vs N = {right}")]
    GridMismatch { left: usize, right: usize },

    #[error("invalid grid: N must be positive")]
    InvalidGrid,

    #[error("index {index} out of range [{min}, {max}]")]
    IndexOutOfRange { index: i64, min: i64, max: i64 },

    #[error("degree {degree} exceeds the grid half-period N = {half}")]
    DegreeTooLarge { degree: usize, half: usize },

    #[error("samples are not real: imaginary part {imag:e} at node {node}")]
    NonRealSamples { node: i64, imag: f64 },

    #[error("singular circulant: symbol value {value:e} at node {node}")]
    Singular { node: i64, value: f64 },

    #[error("nonpositive sample {value:e} at node {node}")]
    NonPositive { node: i64, value: f64 },

    #[error("invalid covariance sequence: {0}")]
    InvalidCovariance(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("dense materialization limited to 2N <= {cap}, got 2N = {size}")]
    DenseTooLarge { size: usize, cap: usize },

    #[error("Newton iteration did not converge in {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error(
        "boundary collapse after {halvings} step halvings at iteration {iteration}: \
         min Q sample {min_q:e}, residual {residual:e}; the covariance data is likely infeasible on this grid"
    )]
    BoundaryCollapse { iteration: usize, halvings: usize, min_q: f64, residual: f64 },

    #[error(
        "numerator reached the boundary of the positive cone (min P sample {min_p:e}) at iteration {iteration}; \
         the cepstral data is inconsistent with the covariances, rerun with lambda > 0"
    )]
    NumeratorBoundary { iteration: usize, min_p: f64 },

    #[error("linear system not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("no feasible grid with N <= {n_max}")]
    ThresholdNotFound { n_max: usize },

    #[error("covariance sequence is outside the outer cone: Toeplitz matrix not positive definite (min eigenvalue {min_eig:e})")]
    NotInOuterCone { min_eig: f64 },

    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    /// Stable variant name, printed by the CLI on stderr.
    pub fn name(&self) -> &'static str {
        match self {
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::GridMismatch { .. } => "GridMismatch",
            Error::InvalidGrid => "InvalidGrid",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::DegreeTooLarge { .. } => "DegreeTooLarge",
            Error::NonRealSamples { .. } => "NonRealSamples",
            Error::Singular { .. } => "Singular",
            Error::NonPositive { .. } => "NonPositive",
            Error::InvalidCovariance(_) => "InvalidCovariance",
            Error::InvalidInput(_) => "InvalidInput",
            Error::EmptyInput(_) => "EmptyInput",
            Error::DenseTooLarge { .. } => "DenseTooLarge",
            Error::MaxIterations { .. } => "MaxIterations",
            Error::BoundaryCollapse { .. } => "BoundaryCollapse",
            Error::NumeratorBoundary { .. } => "NumeratorBoundary",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::ThresholdNotFound { .. } => "ThresholdNotFound",
            Error::NotInOuterCone { .. } => "NotInOuterCone",
            Error::Io { .. } => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
