use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is singular (pivot {pivot} below threshold)")]
    SingularMatrix { pivot: usize },
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("invalid matrix data: {0}")]
    InvalidMatrix(String),
    #[error("slab is empty: start {start}, end {end}")]
    EmptySlab { start: f64, end: f64 },
    #[error("polynomial degree {degree} too low, need at least {min}")]
    DegreeTooLow { degree: usize, min: usize },
    #[error("time {t} outside the domain {what}")]
    OutOfDomain { t: f64, what: &'static str },
    #[error("invalid time mesh: {0}")]
    InvalidMesh(String),
    #[error("matrix {0} is not symmetric")]
    NotSymmetric(&'static str),
    #[error("matrix {0} is not positive definite")]
    NotPositiveDefinite(&'static str),
    #[error("case A requires D = 0")]
    NonzeroDamping,
    #[error("stiffness matrix A is indefinite (min eigenvalue {min_eigenvalue:e})")]
    IndefiniteStiffness { min_eigenvalue: f64 },
    #[error("manufactured solution residual {residual:e} at t = {t} exceeds tolerance")]
    ResidualCheck { t: f64, residual: f64 },
    #[error("MatrixMarket parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error: {0}")]
    Io(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
