//! Download cache for URL sources. Fetching lives here, at the CLI layer,
//! so the transform core stays pure and testable offline.
//!
//! Entries are keyed by URL: the body lands in the cache directory under the
//! URL's SHA-256, next to a small metadata file recording the URL, content
//! digest, and retrieval time. A cached file whose content still matches its
//! recorded digest is never re-downloaded unless forced.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "KGFORGE_CACHE_DIR";

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("i/o error: {0}")]
    Io(String),
    #[error("download failed for {url}: {reason}")]
    Http { url: String, reason: String },
    #[error("{url} is not cached and --offline is set")]
    NotCached { url: String },
    #[error("unsupported URL scheme: {0}")]
    UnsupportedScheme(String),
    #[error("checksum mismatch for {path}: expected {expected}, got {actual}")]
    ChecksumMismatch {
        path: String,
        expected: String,
        actual: String,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheMeta {
    url: String,
    sha256: String,
    retrieved_unix: u64,
}

/// A directory of fetched files keyed by source URL.
pub struct FetchCache {
    dir: PathBuf,
}

impl FetchCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FetchCache { dir: dir.into() }
    }

    /// Cache directory from `KGFORGE_CACHE_DIR`, falling back to
    /// `.kgforge_cache` in the working directory.
    pub fn from_env() -> Self {
        let dir = std::env::var_os(CACHE_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(".kgforge_cache"));
        FetchCache::new(dir)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn entry_paths(&self, url: &str) -> (PathBuf, PathBuf) {
        let key = hex::encode(Sha256::digest(url.as_bytes()));
        (
            self.dir.join(&key),
            self.dir.join(format!("{key}.meta.yaml")),
        )
    }

    /// The cached file for a URL, if present and still matching its recorded
    /// content digest.
    pub fn cached_path(&self, url: &str) -> Option<PathBuf> {
        let (data, meta) = self.entry_paths(url);
        let meta_text = std::fs::read_to_string(meta).ok()?;
        let meta: CacheMeta = serde_yaml::from_str(&meta_text).ok()?;
        let actual = file_sha256(&data).ok()?;
        (meta.sha256 == actual).then_some(data)
    }

    /// Returns the local path for a URL, downloading it into the cache if
    /// needed. `force` refetches; `offline` fails instead of downloading.
    pub fn fetch(&self, url: &str, force: bool, offline: bool) -> Result<PathBuf, FetchError> {
        if !force {
            if let Some(path) = self.cached_path(url) {
                log::info!("cache hit for {url}");
                return Ok(path);
            }
        }
        if offline {
            return Err(FetchError::NotCached {
                url: url.to_string(),
            });
        }
        std::fs::create_dir_all(&self.dir)
            .map_err(|e| FetchError::Io(format!("{}: {e}", self.dir.display())))?;
        let (data_path, meta_path) = self.entry_paths(url);
        let body = download(url)?;
        let digest = hex::encode(Sha256::digest(&body));
        std::fs::write(&data_path, &body)
            .map_err(|e| FetchError::Io(format!("{}: {e}", data_path.display())))?;
        let meta = CacheMeta {
            url: url.to_string(),
            sha256: digest,
            retrieved_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let meta_text = serde_yaml::to_string(&meta)
            .map_err(|e| FetchError::Io(format!("cannot serialize cache meta: {e}")))?;
        std::fs::write(&meta_path, meta_text)
            .map_err(|e| FetchError::Io(format!("{}: {e}", meta_path.display())))?;
        log::info!("fetched {url} into {}", data_path.display());
        Ok(data_path)
    }
}

fn download(url: &str) -> Result<Vec<u8>, FetchError> {
    if let Some(path) = url.strip_prefix("file://") {
        return std::fs::read(path).map_err(|e| FetchError::Http {
            url: url.to_string(),
            reason: e.to_string(),
        });
    }
    if !url.starts_with("http://") && !url.starts_with("https://") {
        return Err(FetchError::UnsupportedScheme(url.to_string()));
    }
    let response = ureq::get(url).call().map_err(|e| FetchError::Http {
        url: url.to_string(),
        reason: e.to_string(),
    })?;
    let mut body = Vec::new();
    response
        .into_reader()
        .read_to_end(&mut body)
        .map_err(|e| FetchError::Http {
            url: url.to_string(),
            reason: e.to_string(),
        })?;
    Ok(body)
}

/// SHA-256 of a file's content, lowercase hex.
pub fn file_sha256(path: &Path) -> Result<String, FetchError> {
    let mut file = std::fs::File::open(path)
        .map_err(|e| FetchError::Io(format!("{}: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    std::io::copy(&mut file, &mut hasher)
        .map_err(|e| FetchError::Io(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(hasher.finalize()))
}

/// Verifies a file against an expected digest, when one is declared.
pub fn verify_checksum(path: &Path, expected: &str) -> Result<(), FetchError> {
    let actual = file_sha256(path)?;
    if !actual.eq_ignore_ascii_case(expected) {
        return Err(FetchError::ChecksumMismatch {
            path: path.display().to_string(),
            expected: expected.to_string(),
            actual,
        });
    }
    Ok(())
}
