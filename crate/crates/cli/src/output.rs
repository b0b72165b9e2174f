//! Staged output files and the run manifest.
//!
//! Everything is rendered in memory first and written in one go, so a run
//! that fails on its inputs leaves nothing behind.

use std::fs;
use std::path::{Component, Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub inputs: Vec<FileDigest>,
    pub config: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub outputs: Vec<FileDigest>,
}

/// Episode ids become directory names, so they must be plain names.
pub fn check_component(name: &str) -> Result<()> {
    let mut parts = Path::new(name).components();
    match (parts.next(), parts.next()) {
        (Some(Component::Normal(_)), None) if !name.contains(['/', '\\']) => Ok(()),
        _ => Err(neotrack_core::Error::Validation(format!(
            "`{name}` cannot be used as a file name"
        ))
        .into()),
    }
}

pub struct Staged {
    command: String,
    config: String,
    seed: Option<u64>,
    inputs: Vec<FileDigest>,
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Staged {
    pub fn new(command: &str, config: String, seed: Option<u64>) -> Self {
        Staged {
            command: command.to_string(),
            config,
            seed,
            inputs: Vec::new(),
            files: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(bytes),
        });
    }

    /// Reads an input file and records its checksum.
    pub fn read_input(&mut self, path: &Path) -> Result<String> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.input(path, &bytes);
        String::from_utf8(bytes)
            .map_err(|_| neotrack_core::Error::Validation(format!("{} is not UTF-8", path.display())).into())
    }

    pub fn add(&mut self, relative: impl Into<PathBuf>, bytes: impl Into<Vec<u8>>) {
        self.files.push((relative.into(), bytes.into()));
    }

    /// Writes all staged files under `root`, then the manifest as
    /// `manifest_name` in the same directory.
    pub fn commit(self, root: &Path, manifest_name: &str) -> Result<RunManifest> {
        let mut outputs = Vec::with_capacity(self.files.len());
        for (rel, bytes) in &self.files {
            let path = root.join(rel);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
            outputs.push(FileDigest {
                path: rel.display().to_string(),
                sha256: sha256_hex(bytes),
            });
        }
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.command,
            inputs: self.inputs,
            config: self.config,
            seed: self.seed,
            outputs,
        };
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        let path = root.join(manifest_name);
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn plain_names_only() {
        assert!(check_component("E01").is_ok());
        for bad in ["", ".", "..", "a/b", "/abs", "a\\b"] {
            assert!(check_component(bad).is_err(), "{bad}");
        }
    }
}
