use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::Context;
use serde::{Deserialize, Serialize};

/// What was run, with which resolved settings, and what it produced.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub algorithm: Option<String>,
    /// Arguments after the program name; `varnorm replay` re-parses them.
    pub args: Vec<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub duration_secs: f64,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: &str, args: &[String], config: serde_json::Value) -> Self {
        Self {
            command: command.to_owned(),
            algorithm: None,
            args: args.to_vec(),
            config,
            seed: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            duration_secs: 0.0,
            version: env!("CARGO_PKG_VERSION").to_owned(),
        }
    }

    pub fn finish(mut self, elapsed: Duration, path: &Path) -> anyhow::Result<()> {
        self.duration_secs = elapsed.as_secs_f64();
        let json = serde_json::to_string_pretty(&self)?;
        fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// `out.vec` -> `out.vec.manifest.json`.
pub fn sidecar(artifact: &Path) -> PathBuf {
    let mut name = artifact.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    artifact.with_file_name(name)
}
