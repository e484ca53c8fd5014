use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use axledet_core::config::RunConfig;
use axledet_core::io::write_atomic;

use crate::manifest::{file_digest, CommandSpec, RunManifest, Seeds, CONFIG_FILE, MANIFEST_FILE};

/// Output directory, worker pool and provenance bookkeeping of one run.
pub struct RunContext {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pool: rayon::ThreadPool,
    workers: usize,
    inputs: BTreeMap<String, String>,
    expected_inputs: Option<BTreeMap<String, String>>,
    outputs: Vec<String>,
}

impl RunContext {
    pub fn new(cfg: RunConfig, out: PathBuf) -> Result<Self> {
        cfg.validate()?;
        let workers = if cfg.deterministic {
            1
        } else if cfg.workers == 0 {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            cfg.workers
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .context("starting worker pool")?;
        std::fs::create_dir_all(&out).with_context(|| format!("creating output directory {}", out.display()))?;
        Ok(Self {
            cfg,
            out,
            pool,
            workers,
            inputs: BTreeMap::new(),
            expected_inputs: None,
            outputs: Vec::new(),
        })
    }

    /// Inputs recorded from now on must match these digests.
    pub fn expect_inputs(&mut self, inputs: BTreeMap<String, String>) {
        self.expected_inputs = Some(inputs);
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.out.join(rel)
    }

    pub fn record_input(&mut self, name: &str, digest: String) -> Result<()> {
        if let Some(expected) = self.expected_inputs.as_ref().and_then(|m| m.get(name)) {
            if *expected != digest {
                bail!("input '{name}' differs from the one recorded in the manifest");
            }
        }
        self.inputs.insert(name.to_string(), digest);
        Ok(())
    }

    /// Register a file already written below the output directory.
    pub fn track(&mut self, rel: impl Into<String>) {
        self.outputs.push(rel.into());
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.path(rel), bytes)?;
        self.track(rel);
        Ok(())
    }

    pub fn write_json<T: serde::Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(rel, text.as_bytes())
    }

    /// Write the materialized config and the manifest.
    pub fn finish(mut self, command: CommandSpec) -> Result<RunManifest> {
        let toml = self.cfg.to_toml()?;
        self.write(CONFIG_FILE, toml.as_bytes())?;
        let mut outputs = BTreeMap::new();
        for rel in &self.outputs {
            outputs.insert(rel.clone(), file_digest(&self.out.join(rel))?);
        }
        let manifest = RunManifest {
            command,
            toolkit_version: axledet_core::VERSION.to_string(),
            created_unix_seconds: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            seeds: Seeds::of(&self.cfg),
            deterministic: self.cfg.deterministic,
            workers: self.workers,
            config: self.cfg.clone(),
            inputs: std::mem::take(&mut self.inputs),
            outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        write_atomic(&self.out.join(MANIFEST_FILE), text.as_bytes())?;
        Ok(manifest)
    }
}
