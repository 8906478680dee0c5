use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("coverage error: {0}")]
    Coverage(String),
    #[error("normalization error: {0}")]
    Normalization(String),
    #[error("invalid detection: {0}")]
    InvalidDetection(String),
    #[error("truncation error: {message} (need n_max >= {required_n_max})")]
    Truncation {
        message: String,
        required_n_max: usize,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
