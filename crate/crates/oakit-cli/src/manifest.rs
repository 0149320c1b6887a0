//! Run manifests: the resolved command, tool version, seed, output paths,
//! and wall-clock duration, written next to every artifact. Replaying a
//! manifest reproduces the artifact byte for byte (the manifest itself
//! carries the only non-deterministic field, the duration).

use anyhow::{bail, Context, Result};
use oakit::harness::ExperimentConfig;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::Instant;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum CommandSpec {
    Construct {
        q: u32,
        d: usize,
    },
    Sample {
        design: String,
        q: u32,
        d: usize,
        seed: u64,
        replicate: u64,
    },
    Decompose {
        integrand: String,
        d: usize,
        m: usize,
    },
    Verify {
        experiment: String,
        config: ExperimentConfig,
        raw_out: Option<String>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub master_seed: u64,
    #[serde(flatten)]
    pub spec: CommandSpec,
    pub outputs: Vec<String>,
    pub duration_ms: u64,
}

impl RunManifest {
    pub fn new(spec: CommandSpec, master_seed: u64, outputs: Vec<&Path>, start: Instant) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed,
            spec,
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            duration_ms: start.elapsed().as_millis() as u64,
        }
    }

    pub fn primary_output(&self) -> Result<&str> {
        match self.outputs.first() {
            Some(p) => Ok(p),
            None => bail!("manifest records no outputs"),
        }
    }
}

/// Manifest path for an artifact: `report.json` -> `report.manifest.json`.
pub fn manifest_path(artifact: &Path) -> std::path::PathBuf {
    artifact.with_extension("manifest.json")
}

pub fn write(artifact: &Path, manifest: RunManifest) -> Result<()> {
    let path = manifest_path(artifact);
    let mut body = serde_json::to_string_pretty(&manifest).context("serializing manifest")?;
    body.push('\n');
    std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
