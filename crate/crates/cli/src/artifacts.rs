//! Atomic artifact writing and the content manifest.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST_NAME: &str = "manifest.json";

/// One output file, held in memory until the run succeeds.
#[derive(Clone, Debug)]
pub struct Artifact {
    pub path: String,
    pub role: &'static str,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(path: impl Into<String>, role: &'static str, bytes: Vec<u8>) -> Self {
        Self {
            path: path.into(),
            role,
            bytes,
        }
    }

    pub fn json<T: Serialize>(path: &str, role: &'static str, value: &T) -> Result<Self, CliError> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Numerical(format!("serialize {path}: {e}")))?;
        bytes.push(b'\n');
        Ok(Self::new(path, role, bytes))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub role: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
    pub config_hash: String,
    pub version: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Manifest {
    pub fn new(artifacts: &[Artifact], config_hash: String) -> Self {
        let mut files: Vec<ManifestEntry> = artifacts
            .iter()
            .map(|a| ManifestEntry {
                path: a.path.clone(),
                sha256: sha256_hex(&a.bytes),
                role: a.role.to_string(),
            })
            .collect();
        files.sort_by(|a, b| a.path.cmp(&b.path));
        Self {
            files,
            config_hash,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Writes `bytes` to `dir/name` through a temporary file in the same directory.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Output(format!("{}: {e}", dir.join(name).display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(dir.join(name)).map_err(|e| io(e.error))?;
    Ok(())
}

/// Writes every artifact, then the manifest last.
pub fn write_all(dir: &Path, artifacts: &[Artifact], config_hash: String) -> Result<Manifest, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    let mut seen = std::collections::BTreeSet::new();
    for a in artifacts {
        if a.path == MANIFEST_NAME || !seen.insert(a.path.as_str()) {
            return Err(CliError::Output(format!("duplicate artifact path {}", a.path)));
        }
        write_atomic(dir, &a.path, &a.bytes)?;
    }
    let manifest = Manifest::new(artifacts, config_hash);
    let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Output(e.to_string()))?;
    bytes.push(b'\n');
    write_atomic(dir, MANIFEST_NAME, &bytes)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_is_sorted_and_written_last() {
        let dir = tempfile::tempdir().unwrap();
        let artifacts = vec![
            Artifact::new("b.csv", "samples", b"x\n".to_vec()),
            Artifact::new("a.json", "report", b"{}".to_vec()),
        ];
        let m = write_all(dir.path(), &artifacts, "h".into()).unwrap();
        assert_eq!(m.files[0].path, "a.json");
        assert_eq!(m.files[1].sha256, sha256_hex(b"x\n"));
        let on_disk = std::fs::read(dir.path().join(MANIFEST_NAME)).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&on_disk).unwrap();
        assert_eq!(v["config_hash"], "h");
        assert_eq!(std::fs::read(dir.path().join("b.csv")).unwrap(), b"x\n");
        let leftovers = std::fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(leftovers, 3);
    }

    #[test]
    fn duplicate_paths_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let a = Artifact::new("a", "r", vec![]);
        assert!(write_all(dir.path(), &[a.clone(), a], "h".into()).is_err());
    }
}
