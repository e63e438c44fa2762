//! Reproduction manifest and digest-recording artifact writer.

use crate::config::{CommandName, RunConfig};
use crate::error::CliError;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    CheckFailed,
    NonConvergence,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::CheckFailed => 1,
            Status::NonConvergence => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub operation: String,
    pub seconds: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub toolkit_version: String,
    pub command: CommandName,
    pub config: RunConfig,
    pub status: Status,
    pub exit_code: i32,
    pub wall_clock_s: f64,
    pub diagnostics: Vec<Diagnostic>,
    pub artifacts: Vec<Artifact>,
}

impl RunManifest {
    /// Digests by file name; wall-clock and diagnostics are excluded on purpose.
    pub fn digests(&self) -> Vec<(String, String)> {
        self.artifacts.iter().map(|a| (a.file.clone(), a.sha256.clone())).collect()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes artifacts under one directory and remembers the digest of each.
pub struct ArtifactSink {
    dir: PathBuf,
    written: Vec<Artifact>,
}

impl ArtifactSink {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn write(&mut self, file: &str, bytes: &[u8]) -> Result<(), CliError> {
        std::fs::write(self.dir.join(file), bytes)?;
        self.written.push(Artifact { file: file.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() });
        Ok(())
    }

    pub fn finish(self) -> Vec<Artifact> {
        self.written
    }
}
