use thiserror::Error;

/// Errors raised by the qmdl library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has a non-finite entry")]
    NonFinite,

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("trace {re} + {im}i is outside the admissible range")]
    TraceOutOfRange { re: f64, im: f64 },

    #[error("trace {0:e} is too small to normalize")]
    ZeroTrace(f64),

    #[error("dense dimension {dim} exceeds the cap {cap}; use the factorized operations")]
    SizeCap { dim: usize, cap: usize },

    #[error("function undefined at eigenvalue {0:e}")]
    Domain(f64),

    #[error("invalid projection system: {0}")]
    InvalidSystem(String),

    #[error("projection system is not minimal (rank-1 complete)")]
    NonMinimalSystem,

    #[error("projection systems do not commute (commutator norm {0:e})")]
    InconsistentFamily(f64),

    #[error("operator is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("support of the conditioning state is not contained in the marginal support (trace deficit {0:e})")]
    SupportMismatch(f64),

    #[error("source level {level} is singular (min eigenvalue {min_eigenvalue:e})")]
    NotRegular { level: usize, min_eigenvalue: f64 },

    #[error("outcome index {index} is invalid for a system with {outcomes} outcomes")]
    InvalidOutcome { index: usize, outcomes: usize },

    #[error("outcome word is empty")]
    EmptyWord,

    #[error("every candidate has zero likelihood")]
    AllZeroLikelihood,

    #[error("conditioning word has zero probability")]
    ZeroConditioning,

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("type-class enumeration needs {count} classes, cap is {cap}")]
    TooManyClasses { count: u128, cap: u128 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
