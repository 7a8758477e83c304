use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] lapcond::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("matrix market: {0}")]
    Mtx(String),

    #[error("invalid generator: {0}")]
    BadGenerator(String),

    #[error("invalid benchmark case: {0}")]
    BadCase(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, BenchError>;
