//! Versioned pool files: trained members plus their label matrices.

use std::path::Path;

use cife_core::learners::{ClassifierPool, PoolPredictions};
use serde::{Deserialize, Serialize};

pub const POOL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolFile {
    pub format_version: u32,
    pub dataset: String,
    pub fold: usize,
    pub pool: ClassifierPool,
    pub predictions: PoolPredictions,
}

#[derive(Debug, thiserror::Error)]
pub enum PoolFileError {
    #[error("pool file {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("pool file {path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("pool file {path}: unsupported format version {found}")]
    Version { path: String, found: u32 },
}

pub fn save(file: &PoolFile, path: &Path) -> Result<(), PoolFileError> {
    let p = || path.display().to_string();
    let text = serde_json::to_string(file).map_err(|source| PoolFileError::Json { path: p(), source })?;
    std::fs::write(path, text).map_err(|source| PoolFileError::Io { path: p(), source })
}

pub fn load(path: &Path) -> Result<PoolFile, PoolFileError> {
    let p = || path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| PoolFileError::Io { path: p(), source })?;
    let file: PoolFile = serde_json::from_str(&text).map_err(|source| PoolFileError::Json { path: p(), source })?;
    if file.format_version != POOL_FORMAT_VERSION {
        return Err(PoolFileError::Version { path: p(), found: file.format_version });
    }
    Ok(file)
}
