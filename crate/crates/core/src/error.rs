use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("trace is {0} (expected 1)")]
    InvalidTrace(f64),

    #[error("vector norm is {0} (expected 1)")]
    InvalidNorm(f64),

    #[error("subsystem shape {dims:?} does not factor dimension {dim}")]
    InvalidShape { dims: Vec<usize>, dim: usize },

    #[error("invalid subsystem index {index} for {factors} factors")]
    InvalidSubsystem { index: usize, factors: usize },

    #[error("Kraus family is not trace preserving (residual norm {0:.3e})")]
    NotTracePreserving(f64),

    #[error("operator is not an isometry (residual norm {0:.3e})")]
    NotIsometry(f64),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("size guard exceeded: {what} needs {required}, limit is {limit}")]
    GuardExceeded {
        what: String,
        required: u128,
        limit: u128,
    },

    #[error("unknown example channel `{0}`")]
    UnknownExample(String),

    #[error("empty typical set (n = {n}, delta = {delta})")]
    EmptyTypicalSet { n: usize, delta: f64 },

    #[error("could not draw {needed} distinct codewords after {attempts} attempts")]
    DistinctnessFailed { needed: usize, attempts: usize },

    #[error("invalid code: {0}")]
    InvalidCode(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownFactor(String),

    #[error("unknown kind `{0}`")]
    UnknownKind(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed matrix encoding: {0}")]
    Encoding(String),
}

pub type Result<T> = std::result::Result<T, Error>;
