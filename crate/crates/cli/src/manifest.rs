//! Run metadata: every output directory is self-describing.

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub config_hash: String,
    /// Build revision of the binary that produced the run.
    pub build: String,
    pub started_unix: u64,
    /// The exact command line.
    pub command: String,
    pub seeds: Vec<u64>,
    /// Hash of the reference config for study evaluations.
    pub reference_hash: Option<String>,
}

impl RunManifest {
    pub fn new(config_hash: &str, seeds: Vec<u64>) -> Self {
        let started_unix =
            SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Self {
            run_id: format!("{started_unix}-{config_hash}"),
            config_hash: config_hash.to_string(),
            build: format!("rallysim {}", env!("CARGO_PKG_VERSION")),
            started_unix,
            command: std::env::args().collect::<Vec<_>>().join(" "),
            seeds,
            reference_hash: None,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(self)?)
            .with_context(|| format!("write {}", path.display()))
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join("manifest.json");
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("read {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }
}
