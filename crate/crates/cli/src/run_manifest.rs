use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Sidecar written next to every output, enough to replay the run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub seeds: Vec<u64>,
    pub outputs: Vec<String>,
    /// Input ids left out of the outputs, with the reason.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
    pub status: &'static str,
    pub tool_version: &'static str,
    /// From SOURCE_DATE_EPOCH when set, else the wall clock.
    pub timestamp: String,
}

pub fn digest(path: &Path) -> Result<InputDigest> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(InputDigest {
        path: path.display().to_string(),
        bytes: bytes.len() as u64,
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

fn timestamp() -> String {
    let at = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| DateTime::<Utc>::from_timestamp(secs, 0))
        .unwrap_or_else(Utc::now);
    at.to_rfc3339_opts(SecondsFormat::Secs, true)
}

// Secrets never reach the sidecar.
fn redact(args: impl Iterator<Item = String>) -> Vec<String> {
    let mut out = Vec::new();
    let mut hide_next = false;
    for arg in args {
        if hide_next {
            out.push("<redacted>".to_owned());
            hide_next = false;
        } else if arg == "--token" {
            out.push(arg);
            hide_next = true;
        } else if arg.starts_with("--token=") {
            out.push("--token=<redacted>".to_owned());
        } else {
            out.push(arg);
        }
    }
    out
}

impl RunManifest {
    pub fn new(command: &str, inputs: &[PathBuf], seeds: Vec<u64>) -> Result<Self> {
        Ok(Self {
            command: command.to_owned(),
            args: redact(std::env::args().skip(1)),
            inputs: inputs.iter().map(|p| digest(p)).collect::<Result<_>>()?,
            seeds,
            outputs: Vec::new(),
            skipped: Vec::new(),
            status: "success",
            tool_version: env!("CARGO_PKG_VERSION"),
            timestamp: timestamp(),
        })
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        crate::commands::write_json(path, self)
    }
}

/// `scores.csv` -> `scores.csv.run.json`
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".run.json");
    PathBuf::from(name)
}

impl RunManifest {
    pub fn finish(
        mut self,
        outcome: crate::commands::Outcome,
        path: &Path,
    ) -> Result<crate::commands::Outcome> {
        self.status = outcome.status();
        self.write(path)?;
        Ok(outcome)
    }
}
