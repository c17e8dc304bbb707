use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::{CliError, Result};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    /// Path relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub config: BTreeMap<String, String>,
    pub artifacts: Vec<Artifact>,
}

impl Manifest {
    /// `(path, sha256)` pairs, the part that must match across reruns.
    pub fn checksums(&self) -> Vec<(String, String)> {
        self.artifacts
            .iter()
            .map(|a| (a.path.clone(), a.sha256.clone()))
            .collect()
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::io(&path, std::io::Error::new(std::io::ErrorKind::InvalidData, e))
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes files into one output directory and records their checksums.
#[derive(Debug)]
pub struct ArtifactWriter {
    dir: PathBuf,
    artifacts: Vec<Artifact>,
}

impl ArtifactWriter {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        fs::write(&path, contents.as_ref()).map_err(|e| CliError::io(&path, e))?;
        self.record(name, contents.as_ref());
        Ok(path)
    }

    /// Registers a file that already exists under the output directory.
    pub fn register(&mut self, name: &str) -> Result<()> {
        let path = self.dir.join(name);
        let bytes = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        self.record(name, &bytes);
        Ok(())
    }

    fn record(&mut self, name: &str, bytes: &[u8]) {
        self.artifacts.retain(|a| a.path != name);
        self.artifacts.push(Artifact {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
    }

    pub fn finish(mut self, config: &RunConfig) -> Result<Manifest> {
        self.artifacts.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            experiment: config.experiment.name().to_string(),
            config: config.entries(),
            artifacts: self.artifacts,
        };
        let path = self.dir.join(MANIFEST);
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_known_input() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_lists_sorted_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = ArtifactWriter::create(dir.path()).unwrap();
        w.write("b.csv", "2\n").unwrap();
        w.write("a.csv", "1\n").unwrap();
        w.write("b.csv", "3\n").unwrap();
        let m = w.finish(&RunConfig::default()).unwrap();
        let paths: Vec<&str> = m.artifacts.iter().map(|a| a.path.as_str()).collect();
        assert_eq!(paths, ["a.csv", "b.csv"]);
        assert_eq!(m.artifacts[1].sha256, sha256_hex(b"3\n"));
        assert_eq!(Manifest::read(dir.path()).unwrap(), m);
    }
}
