//! Plain-text constants registry: one `name = value` pair per line.
//!
//! Lines starting with `#` and blank lines are ignored. The special key
//! `config_hash` holds a hex string; every other value is a float.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

pub const C_HOLDER: &str = "C_holder_corpus";
pub const C_RIESZ: &str = "C_riesz_corpus";
pub const C_SOBOLEV: &str = "C_sobolev_corpus";
pub const C_INTERP: &str = "C_interp_corpus";
pub const C_GRONWALL: &str = "c_gronwall";
pub const MU_GRONWALL: &str = "mu_gronwall";
pub const SAFETY: &str = "calibration_safety";
const HASH_KEY: &str = "config_hash";

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("registry line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("registry is missing constant `{0}`")]
    Missing(String),
    #[error("registry io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstantsRegistry {
    values: BTreeMap<String, f64>,
    config_hash: Option<String>,
}

impl ConstantsRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.values.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<f64, RegistryError> {
        self.get(name).ok_or_else(|| RegistryError::Missing(name.to_string()))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn config_hash(&self) -> Option<&str> {
        self.config_hash.as_deref()
    }

    pub fn set_config_hash(&mut self, hash: impl Into<String>) {
        self.config_hash = Some(hash.into());
    }

    pub fn parse(text: &str) -> Result<Self, RegistryError> {
        let mut reg = ConstantsRegistry::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| RegistryError::Parse { line: i + 1, message };
            let (name, value) = line.split_once('=').ok_or_else(|| err("expected `name = value`".into()))?;
            let (name, value) = (name.trim(), value.trim());
            if name.is_empty() {
                return Err(err("empty name".into()));
            }
            if name == HASH_KEY {
                reg.config_hash = Some(value.to_string());
                continue;
            }
            let v: f64 = value.parse().map_err(|_| err(format!("`{value}` is not a number")))?;
            if !v.is_finite() {
                return Err(err(format!("`{name}` is not finite")));
            }
            if reg.values.insert(name.to_string(), v).is_some() {
                return Err(err(format!("duplicate constant `{name}`")));
            }
        }
        Ok(reg)
    }

    /// Values are printed with Rust's shortest round-trip formatting.
    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(h) = &self.config_hash {
            let _ = writeln!(out, "{HASH_KEY} = {h}");
        }
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k} = {v:?}");
        }
        out
    }

    pub fn load(path: &Path) -> Result<Self, RegistryError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), RegistryError> {
        std::fs::write(path, self.render())?;
        Ok(())
    }
}
