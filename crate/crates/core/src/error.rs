use thiserror::Error;

/// Errors produced by the analysis library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("matrix is not stable: spectral radius {radius} (require < 1 - 1e-9)")]
    Unstable { radius: f64 },

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("link ({0}, {0}) connects a node to itself")]
    SelfLink(usize),

    #[error("uncertain link {0} has no matching coupling")]
    DanglingLink(String),

    #[error("unknown link {0}")]
    UnknownLink(String),

    #[error("degenerate link {link}: {reason}")]
    DegenerateLink { link: String, reason: String },

    #[error("linear solve failed: {0}")]
    Singular(String),

    #[error("iteration did not converge after {iterations} iterations")]
    NotConverged { iterations: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("Kron reduction failed: {0}")]
    Reduction(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// `true` for input/parse failures (as opposed to analysis failures).
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Json(_) | Error::Parse { .. })
    }
}
