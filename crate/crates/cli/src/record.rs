use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One JSON line of output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub params: BTreeMap<String, String>,
    /// A number, or the text of a rational function.
    pub result: serde_json::Value,
    pub error_bar: Option<f64>,
    pub seed: u64,
    pub elapsed_ms: u64,
    pub version: String,
}

impl RunRecord {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }
}

/// Cache directory from `LPP_CACHE_DIR`, if set.
pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os("LPP_CACHE_DIR").filter(|s| !s.is_empty()).map(PathBuf::from)
}

pub fn cache_key(command: &str, params: &BTreeMap<String, String>, seed: u64) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update([0]);
    for (k, v) in params {
        h.update(k.as_bytes());
        h.update([b'=']);
        h.update(v.as_bytes());
        h.update([0]);
    }
    h.update(seed.to_le_bytes());
    h.update(VERSION.as_bytes());
    hex::encode(h.finalize())
}

pub fn cache_load(dir: &PathBuf, key: &str) -> Option<RunRecord> {
    let text = fs::read_to_string(dir.join(format!("{key}.json"))).ok()?;
    serde_json::from_str(&text).ok()
}

pub fn cache_store(dir: &PathBuf, key: &str, rec: &RunRecord) {
    let write = || -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let tmp = dir.join(format!("{key}.tmp"));
        fs::write(&tmp, rec.to_line())?;
        fs::rename(tmp, dir.join(format!("{key}.json")))
    };
    if let Err(e) = write() {
        log::warn!("could not write cache entry in {}: {e}", dir.display());
    }
}
