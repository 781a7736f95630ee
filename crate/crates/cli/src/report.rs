//! Output records, the `summary.json` layout and hashed file manifests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ScenarioConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Pass when `value ≤ tolerance`.
    Le,
    /// Pass when `value ≥ tolerance`.
    Ge,
    /// Pass when `value > tolerance`.
    Gt,
}

/// One pass/fail audit with its residual, tolerance and producing audit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// `module.audit` that produced the value.
    pub audit: String,
    pub value: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, audit: &str, value: f64, comparison: Comparison, tolerance: f64) -> Self {
        let passed = match comparison {
            Comparison::Le => value <= tolerance,
            Comparison::Ge => value >= tolerance,
            Comparison::Gt => value > tolerance,
        };
        Self {
            name: name.into(),
            audit: audit.to_string(),
            value,
            tolerance,
            comparison,
            passed,
        }
    }
}

/// A file produced by a scenario, held in memory until emitted.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub path: String,
    pub bytes: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputRecord {
    pub toolkit: String,
    pub version: String,
    pub scenario: ScenarioConfig,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, serde_json::Value>,
    pub warnings: Vec<String>,
    /// Relative paths of the emitted artifacts besides `summary.json`.
    pub artifacts: Vec<String>,
    #[serde(skip)]
    pub files: Vec<Artifact>,
}

impl OutputRecord {
    pub fn new(scenario: ScenarioConfig) -> Self {
        Self {
            toolkit: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            scenario,
            passed: true,
            checks: Vec::new(),
            metrics: BTreeMap::new(),
            warnings: Vec::new(),
            artifacts: Vec::new(),
            files: Vec::new(),
        }
    }

    pub fn check(&mut self, c: Check) {
        self.passed &= c.passed;
        self.checks.push(c);
    }

    pub fn metric(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("metrics serialize");
        self.metrics.insert(key.to_string(), v);
    }

    pub fn add_file(&mut self, path: impl Into<String>, bytes: Vec<u8>) {
        let path = path.into();
        self.artifacts.push(path.clone());
        self.files.push(Artifact { path, bytes });
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub dir: PathBuf,
    pub files: Vec<ManifestEntry>,
}

#[derive(Debug, thiserror::Error)]
#[error("cannot write {path}: {source}")]
pub struct ReportError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Write `summary.json` and every artifact into `dir`, returning their hashes.
pub fn emit_reports(record: &OutputRecord, dir: &Path) -> Result<Manifest, ReportError> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ReportError { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut summary = serde_json::to_vec_pretty(record).expect("records serialize");
    summary.push(b'\n');
    let mut entries = Vec::new();
    let all = std::iter::once(("summary.json", summary.as_slice()))
        .chain(record.files.iter().map(|a| (a.path.as_str(), a.bytes.as_slice())));
    for (rel, bytes) in all {
        let path = dir.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        std::fs::write(&path, bytes).map_err(io_err(&path))?;
        entries.push(ManifestEntry {
            path: rel.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
    }
    Ok(Manifest {
        dir: dir.to_path_buf(),
        files: entries,
    })
}
