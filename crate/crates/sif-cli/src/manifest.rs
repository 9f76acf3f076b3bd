//! Run manifests: every command that writes files drops a `manifest.json`
//! next to its outputs, recording the full parameter set, timings, and a
//! checksum of every produced file.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const MANIFEST_VERSION: u32 = 1;
pub const CSV_FORMAT_VERSION: u32 = 1;
pub const OPERATOR_FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct FormatVersions {
    pub manifest: u32,
    pub csv: u32,
    pub operator: u32,
}

#[derive(Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub parameters: serde_json::Value,
    pub tool_version: String,
    pub format_versions: FormatVersions,
    pub started_utc: String,
    pub wall_ms: u128,
    pub outputs: Vec<OutputRecord>,
}

pub struct ManifestBuilder {
    command: String,
    parameters: serde_json::Value,
    started: Instant,
    started_utc: String,
    outputs: Vec<PathBuf>,
}

impl ManifestBuilder {
    pub fn new(command: &str, parameters: serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            parameters,
            started: Instant::now(),
            started_utc: chrono::Utc::now().to_rfc3339(),
            outputs: Vec::new(),
        }
    }

    pub fn record(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    /// Writes `manifest.json` into `dir` (atomically) and returns its path.
    pub fn write(self, dir: &Path) -> std::io::Result<PathBuf> {
        let mut outputs = Vec::new();
        for p in &self.outputs {
            let bytes = std::fs::read(p)?;
            let mut hasher = Sha256::new();
            hasher.update(&bytes);
            outputs.push(OutputRecord {
                path: p
                    .file_name()
                    .map(|f| f.to_string_lossy().into_owned())
                    .unwrap_or_else(|| p.display().to_string()),
                bytes: bytes.len() as u64,
                sha256: hex_string(&hasher.finalize()),
            });
        }
        let manifest = RunManifest {
            command: self.command,
            argv: std::env::args().collect(),
            parameters: self.parameters,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            format_versions: FormatVersions {
                manifest: MANIFEST_VERSION,
                csv: CSV_FORMAT_VERSION,
                operator: OPERATOR_FORMAT_VERSION,
            },
            started_utc: self.started_utc,
            wall_ms: self.started.elapsed().as_millis(),
            outputs,
        };
        let path = dir.join("manifest.json");
        let body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        atomic_write(&path, body.as_bytes())?;
        Ok(path)
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes via a temp file in the same directory plus rename, so readers
/// never observe a partial file.
pub fn atomic_write(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".into()),
        std::process::id()
    ));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
