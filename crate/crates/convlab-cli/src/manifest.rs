//! Run manifests: every command that writes files drops a JSON record of the
//! command name, tool version, resolved arguments and output list next to
//! its outputs. `convlab rerun <manifest>` re-executes the recorded command;
//! given the same build, the data files come back byte-identical.

use crate::output::{CliError, CliResult};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    /// Wall-clock time of the run; informational only, ignored by rerun.
    pub timestamp: String,
    pub args: serde_json::Value,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new<A: Serialize>(command: &str, args: &A, outputs: Vec<PathBuf>) -> CliResult<Self> {
        Ok(Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            args: serde_json::to_value(args)?,
            outputs: outputs
                .into_iter()
                .map(|p| p.display().to_string())
                .collect(),
        })
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let body = serde_json::to_string_pretty(self)?;
        crate::output::write_atomic(path, &format!("{body}\n"))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let body = std::fs::read_to_string(path)?;
        serde_json::from_str(&body).map_err(CliError::from)
    }
}

/// Manifest path for a command writing a single file: a `.manifest.json`
/// sibling.
pub fn sibling_manifest(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}
