//! `axledet`: the axle detection pipeline as a command-line tool.
//!
//! Every command runs against one output directory and leaves behind
//! `config.toml` (the fully materialized configuration) and
//! `manifest.json` (command, seeds, worker count, and SHA-256 digests of
//! all inputs and outputs). `axledet rerun <manifest>` repeats a run from
//! its manifest and reports which outputs came out byte-identical.

pub mod commands;
pub mod context;
pub mod data;
pub mod manifest;

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use axledet_core::config::RunConfig;
use clap::{Args, Parser, Subcommand};

pub use commands::{execute, CommandOutput};
pub use context::RunContext;
pub use data::SplitSelection;
pub use manifest::{CommandSpec, RunManifest, CONFIG_FILE, MANIFEST_FILE};

#[derive(Debug, Parser)]
#[command(name = "axledet", version, about = "Axle detection from bridge acceleration signals")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Run configuration (TOML); defaults apply to every missing key.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides paths.output).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Overrides every seed except the data split seed.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Worker threads for per-passage work; 0 uses all cores.
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    /// Single worker; runs repeat byte for byte.
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Passage directory (overrides paths.dataset).
    #[arg(long, global = true, value_name = "DIR")]
    pub dataset: Option<PathBuf>,
    /// Label directory (overrides paths.labels).
    #[arg(long, global = true, value_name = "DIR")]
    pub labels: Option<PathBuf>,
    /// Model checkpoint (overrides paths.checkpoint).
    #[arg(long, global = true, value_name = "PATH")]
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Generate synthetic passages with exact labels.
    Synth,
    /// Derive labels from the wheel-load channels of a dataset.
    Label,
    /// Build the scalogram cache and the scalogram figure data.
    Transform {
        /// Passage whose first sensor goes into fig4_*.csv.
        #[arg(long, value_name = "ID")]
        fig4: Option<String>,
    },
    /// Train the detector.
    Train,
    /// Train once per gamma in sweep.gammas.
    SweepGamma {
        /// Comma-separated gammas (overrides sweep.gammas).
        #[arg(long, value_delimiter = ',', value_name = "LIST")]
        gammas: Option<Vec<f64>>,
    },
    /// Write per-sample probabilities and detected peaks.
    Predict {
        #[arg(long, value_enum, default_value_t = SplitSelection::All)]
        split: SplitSelection,
    },
    /// Score detections against the labels.
    Evaluate {
        #[arg(long, value_enum, default_value_t = SplitSelection::Test)]
        split: SplitSelection,
    },
    /// Print the effective configuration as TOML.
    Config,
    /// Repeat a run from its manifest.json.
    Rerun {
        manifest: PathBuf,
    },
}

/// Config file plus command-line overrides.
pub fn load_config(global: &GlobalArgs) -> Result<RunConfig> {
    let mut cfg = match &global.config {
        Some(path) => RunConfig::load(path).with_context(|| format!("loading config {}", path.display()))?,
        None => RunConfig::default(),
    };
    if let Some(seed) = global.seed {
        cfg.seed = seed;
        cfg.train.seed = seed;
        cfg.synth.seed = seed;
    }
    if let Some(w) = global.workers {
        cfg.workers = w;
    }
    if global.deterministic {
        cfg.deterministic = true;
    }
    if let Some(p) = &global.out {
        cfg.paths.output = p.clone();
    }
    if let Some(p) = &global.dataset {
        cfg.paths.dataset = p.clone();
    }
    if let Some(p) = &global.labels {
        cfg.paths.labels = Some(p.clone());
    }
    if let Some(p) = &global.checkpoint {
        cfg.paths.checkpoint = Some(p.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Files whose digests agree or disagree between a manifest and a rerun.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RerunReport {
    pub identical: Vec<String>,
    pub differing: Vec<String>,
    pub missing: Vec<String>,
}

/// Repeat the run described by `manifest_path` into `out`. Inputs must
/// match the recorded digests; `checkpoint` may point at an equivalent
/// copy of the recorded checkpoint.
pub fn rerun(
    manifest_path: &std::path::Path,
    out: PathBuf,
    checkpoint: Option<PathBuf>,
) -> Result<(CommandOutput, RunManifest, RerunReport)> {
    let recorded = RunManifest::load(manifest_path)?;
    let mut cfg = recorded.config.clone();
    if checkpoint.is_some() {
        cfg.paths.checkpoint = checkpoint;
    }
    let mut ctx = RunContext::new(cfg, out)?;
    ctx.expect_inputs(recorded.inputs.clone());
    let (output, manifest) = execute(ctx, &recorded.command)?;
    let mut report = RerunReport::default();
    for (path, digest) in &recorded.outputs {
        match manifest.outputs.get(path) {
            None => report.missing.push(path.clone()),
            Some(d) if d == digest => report.identical.push(path.clone()),
            Some(_) => report.differing.push(path.clone()),
        }
    }
    Ok((output, manifest, report))
}

pub fn run(cli: Cli) -> Result<()> {
    let spec = match cli.command.clone() {
        Command::Config => {
            let _ = write!(std::io::stdout(), "{}", load_config(&cli.global)?.to_toml()?);
            return Ok(());
        }
        Command::Rerun { manifest } => {
            if cli.global.config.is_some() || cli.global.seed.is_some() {
                bail!("rerun takes its configuration and seeds from the manifest");
            }
            let out = cli.global.out.clone().context("rerun needs --out for the new outputs")?;
            let (_, _, report) = rerun(&manifest, out, cli.global.checkpoint.clone())?;
            eprintln!(
                "{} of {} outputs byte-identical",
                report.identical.len(),
                report.identical.len() + report.differing.len() + report.missing.len()
            );
            for p in report.differing.iter().chain(&report.missing) {
                eprintln!("  differs: {p}");
            }
            return Ok(());
        }
        Command::Synth => CommandSpec::Synth,
        Command::Label => CommandSpec::Label,
        Command::Transform { fig4 } => CommandSpec::Transform { fig4_passage: fig4 },
        Command::Train => CommandSpec::Train,
        Command::SweepGamma { .. } => CommandSpec::SweepGamma,
        Command::Predict { split } => CommandSpec::Predict { split },
        Command::Evaluate { split } => CommandSpec::Evaluate { split },
    };
    let mut cfg = load_config(&cli.global)?;
    if let Command::SweepGamma { gammas: Some(g) } = &cli.command {
        cfg.sweep.gammas = g.clone();
        cfg.validate()?;
    }
    let out = cfg.paths.output.clone();
    let (output, _) = execute(RunContext::new(cfg, out.clone())?, &spec)?;
    // a closed stdout (e.g. piped into `head`) is not a failure of the run
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&output)?);
    eprintln!("wrote {}", out.join(MANIFEST_FILE).display());
    Ok(())
}
