//! Helpers shared by the command and acceptance tests.
#![allow(dead_code)]

use std::path::Path;

use axledet::{execute, CommandOutput, CommandSpec, RunContext, RunManifest};
use axledet_core::config::RunConfig;

pub fn run(cfg: &RunConfig, out: &Path, spec: CommandSpec) -> (CommandOutput, RunManifest) {
    let ctx = RunContext::new(cfg.clone(), out.to_path_buf()).expect("run context");
    execute(ctx, &spec).unwrap_or_else(|e| panic!("{} failed: {e:#}", spec.name()))
}

/// A config small enough to train in a couple of seconds.
pub fn tiny(dataset: &Path) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.deterministic = true;
    cfg.paths.dataset = dataset.to_path_buf();
    cfg.synth.n_passages = 10;
    cfg.synth.max_axles = 4;
    cfg.model.base_feature_maps = 2;
    cfg.train.epochs = 2;
    cfg.train.steps_per_epoch = 2;
    cfg.train.batch_size = 4;
    cfg.train.crop_length = Some(128);
    cfg
}

pub fn read(path: impl AsRef<Path>) -> String {
    let path = path.as_ref();
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

pub fn csv_rows(path: impl AsRef<Path>) -> Vec<Vec<String>> {
    read(path)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}
