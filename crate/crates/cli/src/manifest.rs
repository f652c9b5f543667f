//! Run manifests: config echo, results, and a sha256 per artifact file.
//! The creation timestamp sits outside the hashed content, so re-running
//! with the same config and seed reproduces every hash.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliResult;

pub struct Manifest {
    command: &'static str,
    config: Value,
    results: Value,
    artifacts: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(command: &'static str, config: Value) -> Self {
        Manifest {
            command,
            config,
            results: Value::Null,
            artifacts: BTreeMap::new(),
        }
    }

    pub fn set_results(&mut self, results: Value) {
        self.results = results;
    }

    /// Hashes an already-written artifact into the manifest.
    pub fn add_artifact(&mut self, dir: &Path, name: &str) -> CliResult<()> {
        let bytes = fs::read(dir.join(name))?;
        let digest = Sha256::digest(&bytes);
        let mut hex = String::with_capacity(64);
        for b in digest {
            hex.push_str(&format!("{b:02x}"));
        }
        self.artifacts.insert(name.to_string(), hex);
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        let created = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        let doc = json!({
            "command": self.command,
            "created_utc_s": created,
            "config": self.config,
            "results": self.results,
            "artifacts": self.artifacts,
        });
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&doc)?)?;
        Ok(())
    }
}
