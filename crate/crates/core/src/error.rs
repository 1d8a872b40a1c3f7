use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("field has {found} values but the grid has {expected} cells")]
    GridMismatch { expected: usize, found: usize },

    #[error("data vector has {found} entries, model expects {expected}")]
    DataMismatch { expected: usize, found: usize },

    #[error("linear solve failed: {0}")]
    Solver(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("{0} is not a shape parameter")]
    NotAShapeParameter(&'static str),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
