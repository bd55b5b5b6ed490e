use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::snapshot::{read_snapshot, write_snapshot, SnapshotData};
use super::IoError;
use crate::field::Grid3;
use crate::solver::FlowState;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub step: usize,
    pub time: f64,
    /// Relative to the manifest's directory.
    pub velocity: PathBuf,
    pub pressure: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub grid: Grid3,
    pub dt: f64,
    pub viscosity: f64,
    pub snapshots: Vec<SnapshotEntry>,
}

impl Manifest {
    pub fn new(config_hash: &str, grid: Grid3, viscosity: f64) -> Self {
        Manifest { config_hash: config_hash.to_string(), grid, dt: 0.0, viscosity, snapshots: Vec::new() }
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| IoError::Format(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<(), IoError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| IoError::Format(e.to_string()))?;
        fs::write(path, text + "\n").map_err(|e| IoError::io(path, e))
    }
}

/// Writes snapshots into a directory and keeps the manifest in step.
#[derive(Debug)]
pub struct TrajectoryWriter {
    dir: PathBuf,
    manifest: Manifest,
}

impl TrajectoryWriter {
    pub fn create(dir: &Path, manifest: Manifest) -> Result<Self, IoError> {
        fs::create_dir_all(dir).map_err(|e| IoError::io(dir, e))?;
        Ok(TrajectoryWriter { dir: dir.to_path_buf(), manifest })
    }

    pub fn push(&mut self, step: usize, state: &FlowState<f64>) -> Result<(), IoError> {
        let velocity = PathBuf::from(format!("v_{step:06}.pvrl"));
        let pressure = PathBuf::from(format!("pi_{step:06}.pvrl"));
        write_snapshot(&self.dir.join(&velocity), &SnapshotData::Vector(state.v.clone()))?;
        write_snapshot(&self.dir.join(&pressure), &SnapshotData::Scalar(state.pi.clone()))?;
        self.manifest.snapshots.push(SnapshotEntry { step, time: state.t, velocity, pressure });
        Ok(())
    }

    pub fn finish(mut self, dt: f64) -> Result<PathBuf, IoError> {
        self.manifest.dt = dt;
        let path = self.dir.join(MANIFEST_FILE);
        self.manifest.save(&path)?;
        Ok(path)
    }
}

/// Loads every snapshot listed in a manifest. The pressure is read back from
/// disk and checked against the grid; it is not recomputed.
pub fn load_trajectory(manifest_path: &Path) -> Result<(Manifest, Vec<FlowState<f64>>), IoError> {
    let manifest = Manifest::load(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let mut states = Vec::with_capacity(manifest.snapshots.len());
    for entry in &manifest.snapshots {
        let v = match read_snapshot(&base.join(&entry.velocity))? {
            SnapshotData::Vector(v) => v,
            SnapshotData::Scalar(_) => {
                return Err(IoError::Format(format!("{} is not a vector field", entry.velocity.display())))
            }
        };
        let pi = match read_snapshot(&base.join(&entry.pressure))? {
            SnapshotData::Scalar(p) => p,
            SnapshotData::Vector(_) => {
                return Err(IoError::Format(format!("{} is not a scalar field", entry.pressure.display())))
            }
        };
        if *v.grid() != manifest.grid || *pi.grid() != manifest.grid {
            return Err(IoError::Format(format!("snapshot at step {} does not match the manifest grid", entry.step)));
        }
        states.push(FlowState { t: entry.time, v, pi });
    }
    Ok((manifest, states))
}
