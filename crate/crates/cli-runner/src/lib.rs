//! Orchestration for the extended Lorenz toolkit: subcommands, configuration,
//! schema-versioned reports and reproduction manifests.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

pub use commands::*;
pub use config::*;
pub use error::CliError;
pub use manifest::*;

use std::time::Instant;

/// Runs a materialized config, writes every artifact plus the manifest, and
/// returns the manifest.
pub fn execute(cfg: &RunConfig) -> Result<RunManifest, CliError> {
    let cmd = cfg.command.ok_or_else(|| CliError::Usage("config has no command".into()))?;
    let dir = cfg.out_dir.clone().ok_or_else(|| CliError::Usage("config has no out_dir".into()))?;
    let t0 = Instant::now();
    let out = run(cfg)?;
    let mut sink = ArtifactSink::new(&dir)?;
    for (name, bytes) in &out.files {
        sink.write(name, bytes)?;
    }
    let m = RunManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        command: cmd,
        config: cfg.clone(),
        status: out.status,
        exit_code: out.status.exit_code(),
        wall_clock_s: t0.elapsed().as_secs_f64(),
        diagnostics: out.diagnostics,
        artifacts: sink.finish(),
    };
    std::fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&m)? + "\n")?;
    Ok(m)
}
