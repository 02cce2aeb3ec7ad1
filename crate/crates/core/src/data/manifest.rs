//! Dataset manifest: where each benchmark file lives, where it can be
//! downloaded from, and what it is expected to contain.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{binarize_ova, read_keel};
use crate::error::{Error, Result};

/// Tolerance on the imbalance ratio when validating a file against its entry.
pub const IR_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    /// Path of the `.dat` file, relative to the manifest's directory.
    pub path: PathBuf,
    pub url: String,
    /// SHA-256 of the `.dat` file contents.
    pub sha256: String,
    pub expected_instances: usize,
    pub expected_features: usize,
    pub expected_ir: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub base_dir: PathBuf,
    pub datasets: BTreeMap<String, DatasetEntry>,
}

/// Outcome of checking one file against its manifest entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Validation {
    pub name: String,
    pub checksum_ok: bool,
    pub instances: usize,
    pub features: usize,
    pub imbalance_ratio: f64,
    pub expected_instances: usize,
    pub expected_features: usize,
    pub expected_ir: f64,
    pub error: Option<String>,
}

impl Validation {
    pub fn shape_ok(&self) -> bool {
        self.error.is_none()
            && self.instances == self.expected_instances
            && self.features == self.expected_features
    }

    pub fn ir_ok(&self) -> bool {
        self.error.is_none() && (self.imbalance_ratio - self.expected_ir).abs() <= IR_TOLERANCE
    }

    pub fn passed(&self) -> bool {
        self.checksum_ok && self.shape_ok() && self.ir_ok()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let datasets: BTreeMap<String, DatasetEntry> = serde_json::from_str(&text)?;
        let base_dir = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(Manifest { base_dir, datasets })
    }

    pub fn entry(&self, name: &str) -> Result<&DatasetEntry> {
        self.datasets
            .get(name)
            .ok_or_else(|| Error::Config(format!("dataset {name:?} is not in the manifest")))
    }

    pub fn path_of(&self, name: &str) -> Result<PathBuf> {
        Ok(self.base_dir.join(&self.entry(name)?.path))
    }

    pub fn validate(&self, name: &str) -> Result<Validation> {
        let entry = self.entry(name)?;
        let path = self.base_dir.join(&entry.path);
        let mut v = Validation {
            name: name.to_string(),
            checksum_ok: false,
            instances: 0,
            features: 0,
            imbalance_ratio: f64::NAN,
            expected_instances: entry.expected_instances,
            expected_features: entry.expected_features,
            expected_ir: entry.expected_ir,
            error: None,
        };
        match std::fs::read(&path) {
            Ok(bytes) => v.checksum_ok = sha256_hex(&bytes).eq_ignore_ascii_case(&entry.sha256),
            Err(e) => {
                v.error = Some(Error::io(&path, e).to_string());
                return Ok(v);
            }
        }
        match read_keel(&path).and_then(|raw| {
            let bin = binarize_ova(&raw)?;
            Ok((raw.n_instances(), raw.n_features(), bin.imbalance_ratio))
        }) {
            Ok((n, d, ir)) => {
                v.instances = n;
                v.features = d;
                v.imbalance_ratio = ir;
            }
            Err(e) => v.error = Some(e.to_string()),
        }
        Ok(v)
    }

    pub fn validate_all(&self) -> Result<Vec<Validation>> {
        self.datasets.keys().map(|n| self.validate(n)).collect()
    }

    /// Downloads a dataset unless a file with the expected checksum is
    /// already present. Zip archives are unpacked to the `.dat` member
    /// matching the entry's file name. Returns `true` if a download happened.
    pub fn fetch(&self, name: &str) -> Result<bool> {
        let entry = self.entry(name)?;
        let path = self.base_dir.join(&entry.path);
        if let Ok(existing) = std::fs::read(&path) {
            if sha256_hex(&existing).eq_ignore_ascii_case(&entry.sha256) {
                return Ok(false);
            }
        }
        let response = ureq::get(&entry.url)
            .call()
            .map_err(|e| Error::Config(format!("{name}: download from {} failed: {e}", entry.url)))?;
        let mut body = Vec::new();
        response
            .into_reader()
            .read_to_end(&mut body)
            .map_err(|e| Error::io(&path, e))?;
        let content = if body.starts_with(b"PK") {
            extract_member(&body, &entry.path)?
        } else {
            body
        };
        let digest = sha256_hex(&content);
        if !digest.eq_ignore_ascii_case(&entry.sha256) {
            return Err(Error::Config(format!(
                "{name}: checksum mismatch, expected {} got {digest}",
                entry.sha256
            )));
        }
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
        Ok(true)
    }
}

fn extract_member(archive: &[u8], wanted: &Path) -> Result<Vec<u8>> {
    let file_name = wanted
        .file_name()
        .and_then(|f| f.to_str())
        .unwrap_or_default()
        .to_string();
    let mut zip = zip::ZipArchive::new(std::io::Cursor::new(archive))
        .map_err(|e| Error::Config(format!("bad zip archive: {e}")))?;
    for i in 0..zip.len() {
        let mut member = zip
            .by_index(i)
            .map_err(|e| Error::Config(format!("bad zip member: {e}")))?;
        if member.name().rsplit('/').next() == Some(file_name.as_str()) {
            let mut out = Vec::new();
            member
                .read_to_end(&mut out)
                .map_err(|e| Error::io(wanted, e))?;
            return Ok(out);
        }
    }
    Err(Error::Config(format!("archive has no member {file_name}")))
}
