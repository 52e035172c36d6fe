//! Content-addressed artifact store.
//!
//! Artifacts live under `store/` as hash-named files: texts as UTF-8
//! `.txt`, images as `.png`. Writes go through a temp file plus rename,
//! and re-putting existing content is a no-op, which makes resume cheap
//! and concurrent writers safe.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

pub const STORE_DIR: &str = "store";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("content store write failed for {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("artifact missing from store: {path}")]
    Missing { path: String },
    #[error("artifact {path} does not hash to {expected}")]
    HashMismatch { path: String, expected: String },
}

/// Reference to one stored artifact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredArtifact {
    /// Hex SHA-256 of the content.
    pub hash: String,
    /// Path relative to the run directory, e.g. `store/ab12...cd.txt`.
    pub rel_path: String,
}

/// Filesystem-backed content-addressed store rooted in a run directory.
#[derive(Debug, Clone)]
pub struct ContentStore {
    run_dir: PathBuf,
}

impl ContentStore {
    pub fn open(run_dir: &Path) -> Result<Self, StoreError> {
        let store_dir = run_dir.join(STORE_DIR);
        std::fs::create_dir_all(&store_dir).map_err(|e| StoreError::Write {
            path: store_dir.display().to_string(),
            source: e,
        })?;
        Ok(ContentStore {
            run_dir: run_dir.to_path_buf(),
        })
    }

    pub fn run_dir(&self) -> &Path {
        &self.run_dir
    }

    pub fn put_text(&self, text: &str) -> Result<StoredArtifact, StoreError> {
        self.put_bytes(text.as_bytes(), "txt")
    }

    pub fn put_image(&self, bytes: &[u8]) -> Result<StoredArtifact, StoreError> {
        self.put_bytes(bytes, "png")
    }

    fn put_bytes(&self, bytes: &[u8], ext: &str) -> Result<StoredArtifact, StoreError> {
        let hash = hex::encode(Sha256::digest(bytes));
        let rel_path = format!("{STORE_DIR}/{hash}.{ext}");
        let abs = self.run_dir.join(&rel_path);
        if !abs.exists() {
            let tmp = abs.with_extension(format!("{ext}.tmp-{}", std::process::id()));
            std::fs::write(&tmp, bytes)
                .and_then(|()| std::fs::rename(&tmp, &abs))
                .map_err(|e| StoreError::Write {
                    path: rel_path.clone(),
                    source: e,
                })?;
        }
        Ok(StoredArtifact { hash, rel_path })
    }

    pub fn read_text(&self, rel_path: &str) -> Result<String, StoreError> {
        let bytes = self.read_bytes(rel_path)?;
        String::from_utf8(bytes).map_err(|_| StoreError::HashMismatch {
            path: rel_path.to_string(),
            expected: "valid UTF-8".to_string(),
        })
    }

    pub fn read_bytes(&self, rel_path: &str) -> Result<Vec<u8>, StoreError> {
        std::fs::read(self.run_dir.join(rel_path)).map_err(|_| StoreError::Missing {
            path: rel_path.to_string(),
        })
    }

    /// Check that the artifact exists and re-hashes to `expected`.
    pub fn verify(&self, rel_path: &str, expected: &str) -> Result<(), StoreError> {
        let bytes = self.read_bytes(rel_path)?;
        let hash = hex::encode(Sha256::digest(&bytes));
        if hash != expected {
            return Err(StoreError::HashMismatch {
                path: rel_path.to_string(),
                expected: expected.to_string(),
            });
        }
        Ok(())
    }
}
