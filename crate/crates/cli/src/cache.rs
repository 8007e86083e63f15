//! Content-addressed stage artifacts.
//!
//! A stage key is the SHA-256 of the stage name, the tool version and the
//! keys or digests it depends on, so a change anywhere upstream changes every
//! downstream key.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn digest_file(path: &Path) -> CliResult<String> {
    let mut file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| CliError::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex(&hasher.finalize()))
}

pub fn stage_key(stage: &str, parts: &[&str]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(env!("CARGO_PKG_VERSION").as_bytes());
    hasher.update([0]);
    hasher.update(stage.as_bytes());
    for part in parts {
        hasher.update([0]);
        hasher.update(part.as_bytes());
    }
    hex(&hasher.finalize())
}

/// Canonical text of a configuration value for keying.
pub fn config_text<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("configuration serializes")
}

#[derive(Debug, Clone)]
pub struct StageCache {
    dir: Option<PathBuf>,
}

impl StageCache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        StageCache { dir }
    }

    fn path(&self, stage: &str, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{stage}-{key}.json")))
    }

    pub fn load<T: DeserializeOwned>(&self, stage: &str, key: &str) -> Option<T> {
        let path = self.path(stage, key)?;
        let file = File::open(&path).ok()?;
        match serde_json::from_reader(BufReader::new(file)) {
            Ok(value) => Some(value),
            Err(e) => {
                log::warn!("ignoring unreadable cache entry {}: {e}", path.display());
                None
            }
        }
    }

    pub fn store<T: Serialize>(&self, stage: &str, key: &str, value: &T) -> CliResult<()> {
        let Some(path) = self.path(stage, key) else {
            return Ok(());
        };
        let dir = path.parent().expect("cache entries live in a directory");
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        let file = File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
        let mut writer = BufWriter::new(file);
        serde_json::to_writer(&mut writer, value).map_err(|e| CliError::io(&tmp, e.into()))?;
        writer.flush().map_err(|e| CliError::io(&tmp, e))?;
        drop(writer);
        std::fs::rename(&tmp, &path).map_err(|e| CliError::io(&path, e))
    }
}
