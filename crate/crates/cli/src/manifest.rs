use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use axledet_core::config::RunConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::SplitSelection;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.toml";

/// The subcommand a run executed, with its command-specific arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum CommandSpec {
    Synth,
    Label,
    Transform { fig4_passage: Option<String> },
    Train,
    SweepGamma,
    Predict { split: SplitSelection },
    Evaluate { split: SplitSelection },
}

impl CommandSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CommandSpec::Synth => "synth",
            CommandSpec::Label => "label",
            CommandSpec::Transform { .. } => "transform",
            CommandSpec::Train => "train",
            CommandSpec::SweepGamma => "sweep-gamma",
            CommandSpec::Predict { .. } => "predict",
            CommandSpec::Evaluate { .. } => "evaluate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub run: u64,
    pub batches: u64,
    pub split: u64,
    pub synth: u64,
}

impl Seeds {
    pub fn of(cfg: &RunConfig) -> Self {
        Self {
            run: cfg.seed,
            batches: cfg.train.seed,
            split: cfg.train.split_seed,
            synth: cfg.synth.seed,
        }
    }
}

/// Everything needed to repeat a run: the command, the fully materialized
/// config, and SHA-256 digests of every input and output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: CommandSpec,
    pub toolkit_version: String,
    pub created_unix_seconds: u64,
    pub seeds: Seeds,
    pub deterministic: bool,
    pub workers: usize,
    pub config: RunConfig,
    pub inputs: BTreeMap<String, String>,
    /// Paths relative to the output directory.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

/// Digest over the names and contents of `files`, in the given order.
pub fn fingerprint_files(files: &[PathBuf]) -> Result<String> {
    let mut h = Sha256::new();
    for f in files {
        let bytes = fs::read(f).with_context(|| format!("reading {}", f.display()))?;
        let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        h.update((name.len() as u64).to_le_bytes());
        h.update(name.as_bytes());
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(&bytes);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}
