//! Reproducibility manifest: everything needed to rerun an experiment and
//! check that the rerun produced the same archive.
//!
//! The `environment` section (wall clock, job count, timing file digests)
//! differs between otherwise identical runs and is ignored by [`compare`].

use std::collections::BTreeMap;
use std::path::Path;

use opsim_core::SolverSettings;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ExperimentConfig;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Fields compared before all others, so a mismatch names a digest first.
const DIGEST_FIELDS: [&str; 5] = ["archive_digests", "config_digest", "config_file_digest", "system_file", "timeseries"];
const IGNORED_FIELD: &str = "environment";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    /// As written in the config, relative to the config file.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseStatus {
    pub test_set: String,
    pub completed: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub abort_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub note: String,
    pub started_utc: String,
    pub elapsed_s: f64,
    pub jobs: usize,
    pub timing_digests: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    /// The config file, verbatim.
    pub experiment_config: String,
    pub config_file_digest: String,
    /// The config after command-line overrides.
    pub effective_config: ExperimentConfig,
    pub config_digest: String,
    /// `field -> "config value -> used value"`.
    pub overrides: BTreeMap<String, String>,
    pub master_seed: u64,
    pub system_file: FileDigest,
    pub timeseries: BTreeMap<String, FileDigest>,
    pub solver_settings: SolverSettings,
    pub software: BTreeMap<String, String>,
    pub cases: Vec<CaseStatus>,
    pub archive_digests: BTreeMap<String, String>,
    pub environment: Environment,
}

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io { path: std::path::PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: std::path::PathBuf, source: serde_json::Error },
}

pub fn software_versions() -> BTreeMap<String, String> {
    BTreeMap::from([
        ("opsim".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("opsim-core".to_string(), opsim_core::VERSION.to_string()),
    ])
}

impl Manifest {
    pub fn write(&self, path: &Path) -> Result<(), ManifestError> {
        let mut bytes = serde_json::to_vec_pretty(self).map_err(|source| ManifestError::Json { path: path.to_path_buf(), source })?;
        bytes.push(b'\n');
        std::fs::write(path, bytes).map_err(|source| ManifestError::Io { path: path.to_path_buf(), source })
    }
}

/// Reads a manifest as plain JSON, so manifests from other versions can
/// still be compared.
pub fn read_value(path: &Path) -> Result<Value, ManifestError> {
    let bytes = std::fs::read(path).map_err(|source| ManifestError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_slice(&bytes).map_err(|source| ManifestError::Json { path: path.to_path_buf(), source })
}

/// Path of the first differing field, ignoring the environment section, or
/// `None` when the manifests agree.
pub fn compare(a: &Value, b: &Value) -> Option<String> {
    let empty = serde_json::Map::new();
    let (ma, mb) = (a.as_object().unwrap_or(&empty), b.as_object().unwrap_or(&empty));
    if !a.is_object() || !b.is_object() {
        return (a != b).then(String::new);
    }
    let mut rest: Vec<&String> = ma.keys().chain(mb.keys()).filter(|k| !DIGEST_FIELDS.contains(&k.as_str())).collect();
    rest.sort();
    rest.dedup();
    let order = DIGEST_FIELDS.iter().copied().chain(rest.into_iter().map(String::as_str));
    for key in order {
        if key == IGNORED_FIELD {
            continue;
        }
        if let Some(path) = diff(ma.get(key), mb.get(key), key.to_string()) {
            return Some(path);
        }
    }
    None
}

fn diff(a: Option<&Value>, b: Option<&Value>, path: String) -> Option<String> {
    match (a, b) {
        (None, None) => None,
        (Some(Value::Object(x)), Some(Value::Object(y))) => {
            let mut keys: Vec<&String> = x.keys().chain(y.keys()).collect();
            keys.sort();
            keys.dedup();
            keys.into_iter().find_map(|k| diff(x.get(k), y.get(k), format!("{path}.{k}")))
        }
        (Some(Value::Array(x)), Some(Value::Array(y))) => (0..x.len().max(y.len()))
            .find_map(|i| diff(x.get(i), y.get(i), format!("{path}[{i}]"))),
        (x, y) => (x != y).then_some(path),
    }
}
