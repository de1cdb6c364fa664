use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("pole of the Gamma function at x = {0}")]
    Pole(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("index error: {0}")]
    Index(String),

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("quadrature order {requested} exceeds the configured maximum {max}")]
    Resource { requested: usize, max: usize },

    #[error("adaptive integration did not converge: {0}")]
    NonConvergence(String),

    #[error("interpolation error: {0}")]
    Interpolation(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("order out of range: {0}")]
    OrderRange(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
