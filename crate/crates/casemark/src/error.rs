use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),
    #[error("degenerate inventory: {0}")]
    DegenerateInventory(String),
    #[error("checkpoint error in {}: {msg}", path.display())]
    Checkpoint { path: PathBuf, msg: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
