//! Persistence: run configuration, binary field snapshots and trajectory manifests.

mod config;
mod manifest;
mod snapshot;

pub use config::{load_config, parse_config, ConfigError, RunConfig};
pub use manifest::{load_trajectory, Manifest, SnapshotEntry, TrajectoryWriter, MANIFEST_FILE};
pub use snapshot::{
    decode_snapshot, encode_snapshot, read_snapshot, write_snapshot, SnapshotData, HEADER_LEN, MAGIC, VERSION,
};

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("format error: {0}")]
    Format(String),
    #[error("snapshot version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl IoError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io { path: path.to_path_buf(), source }
    }
}

/// Lowercase hex SHA-256.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
