use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Record of one CLI run, written next to its outputs.
///
/// Every computation is deterministic, so running `args` again with the
/// same build reproduces all listed outputs byte for byte. Wall-clock
/// timings live only here.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub version: String,
    pub deterministic: bool,
    pub parameters: serde_json::Value,
    pub outputs: Vec<PathBuf>,
    pub timings: BTreeMap<String, f64>,
    pub exit_code: u8,
}

impl RunManifest {
    pub fn new(command: &str, args: Vec<String>, parameters: serde_json::Value) -> Self {
        RunManifest {
            command: command.to_string(),
            args,
            version: env!("CARGO_PKG_VERSION").to_string(),
            deterministic: true,
            parameters,
            outputs: Vec::new(),
            timings: BTreeMap::new(),
            exit_code: 0,
        }
    }

    /// Writes `text` under `dir` and records the path.
    pub fn emit(&mut self, dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(name);
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(path.clone());
        Ok(path)
    }

    pub fn time(&mut self, what: &str, seconds: f64) {
        *self.timings.entry(what.to_string()).or_insert(0.0) += seconds;
    }

    pub fn finish(mut self, dir: &Path, exit_code: u8) -> Result<PathBuf> {
        self.exit_code = exit_code;
        let name = format!("{}-manifest.json", self.command);
        let text = serde_json::to_string_pretty(&self)? + "\n";
        std::fs::create_dir_all(dir)?;
        let path = dir.join(name);
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
