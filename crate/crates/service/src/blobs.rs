//! Content-addressed image blobs.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use uisuggest_core::fsutil::atomic_write;

#[derive(Debug, Clone)]
pub struct BlobStore {
    dir: PathBuf,
}

pub fn blob_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn blob_url(hash: &str) -> String {
    format!("/api/v1/blobs/{hash}")
}

impl BlobStore {
    pub fn open(dir: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    fn path(&self, hash: &str) -> PathBuf {
        self.dir.join(format!("{hash}.png"))
    }

    /// Stores PNG bytes under their SHA-256 and returns the hash.
    pub fn put(&self, png: &[u8]) -> std::io::Result<String> {
        let hash = blob_hash(png);
        let path = self.path(&hash);
        if !path.exists() {
            atomic_write(&path, png)?;
        }
        Ok(hash)
    }

    pub fn get(&self, hash: &str) -> Option<Vec<u8>> {
        if hash.len() != 64 || !hash.bytes().all(|b| b.is_ascii_hexdigit() && !b.is_ascii_uppercase()) {
            return None;
        }
        std::fs::read(self.path(hash)).ok()
    }
}
