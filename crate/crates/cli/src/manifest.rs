//! Run manifests: one JSON sidecar per primary output, recording the exact
//! command, resolved configuration, seed, input hashes, and wall time.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub command_line: Vec<String>,
    pub config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub input_hashes: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub wall_time_ms: u64,
}

pub struct ManifestBuilder {
    command: String,
    config: serde_json::Value,
    seed: Option<u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(command: &str, config: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            config,
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn input(&mut self, path: impl AsRef<Path>) -> &mut Self {
        self.inputs.push(path.as_ref().to_path_buf());
        self
    }

    pub fn output(&mut self, path: impl AsRef<Path>) -> &mut Self {
        self.outputs.push(path.as_ref().to_path_buf());
        self
    }

    /// Writes `<primary_output>.manifest.json` atomically (temp file plus
    /// rename in the same directory).
    pub fn write(self, primary_output: impl AsRef<Path>) -> Result<()> {
        let mut input_hashes = BTreeMap::new();
        for path in &self.inputs {
            let bytes = std::fs::read(path)
                .with_context(|| format!("hashing input {}", path.display()))?;
            let mut hasher = Sha256::new();
            hasher.update(&bytes);
            let digest = hasher.finalize();
            let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
            input_hashes.insert(path.display().to_string(), hex);
        }
        let manifest = RunManifest {
            command: self.command,
            command_line: std::env::args().collect(),
            config: self.config,
            seed: self.seed,
            input_hashes,
            outputs: self.outputs.iter().map(|p| p.display().to_string()).collect(),
            wall_time_ms: self.started.elapsed().as_millis() as u64,
        };
        let primary = primary_output.as_ref();
        let manifest_path = sibling_manifest_path(primary);
        let tmp_path = manifest_path.with_extension("json.tmp");
        {
            let mut tmp = std::fs::File::create(&tmp_path)
                .with_context(|| format!("creating {}", tmp_path.display()))?;
            tmp.write_all(serde_json::to_string_pretty(&manifest)?.as_bytes())?;
            tmp.write_all(b"\n")?;
            tmp.sync_all().ok();
        }
        std::fs::rename(&tmp_path, &manifest_path)
            .with_context(|| format!("renaming manifest into {}", manifest_path.display()))?;
        Ok(())
    }
}

pub fn sibling_manifest_path(primary_output: &Path) -> PathBuf {
    let mut name = primary_output
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".to_string());
    name.push_str(".manifest.json");
    primary_output.with_file_name(name)
}
