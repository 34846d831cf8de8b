use thiserror::Error;

#[derive(Debug, Error)]
pub enum PaeError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("synthesis failed: {msg} (worst grid point x = {at:.6}, value {value:.3e})")]
    Synthesis { msg: String, at: f64, value: f64 },
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PaeError>;
