use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate triangle: {0}")]
    Degenerate(String),
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("assembly failed on element {element}: {msg}")]
    Assembly { element: usize, msg: String },
    #[error("linear solve failed: {0}")]
    Solve(String),
    #[error("patch reconstruction failed on element {0}")]
    Reconstruction(usize),
    #[error("remeshing failed: {0}")]
    Remesh(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("unsupported quadrature degree {0}")]
    UnsupportedDegree(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, got })
    }
}
