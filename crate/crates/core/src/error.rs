use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Riccati iteration did not converge after {iterations} iterations (last residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("infeasible constraints{}: row {row} violated by {violation:.3e}", column.map(|c| format!(" in column {c}")).unwrap_or_default())]
    Infeasible {
        column: Option<usize>,
        row: usize,
        violation: f64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("synthesis failed: {0}")]
    Synthesis(String),

    #[error("closed loop is unstable (spectral radius {spectral_radius:.6})")]
    Unstable { spectral_radius: f64 },

    #[error("eigenvalue iteration failed to converge")]
    EigenFailure,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
