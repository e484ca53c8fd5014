use anyhow::{bail, Result};
use axledet_core::detector::{
    read_checkpoint, train_with_progress, write_history_csv, DetectorModel, Example, HistoryRow, TrainConfig,
};
use serde::{Deserialize, Serialize};

use crate::context::RunContext;
use crate::data::load_dataset;
use crate::manifest::file_digest;

/// Best-validation result of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub gamma: f64,
    pub best_epoch: usize,
    pub epochs_completed: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub val_predictions: usize,
    /// "ok", or "unusable" when the kept weights never produce a peak.
    pub status: String,
    pub n_parameters: usize,
    pub data_fingerprint: String,
}

pub const CHECKPOINT_FILE: &str = "checkpoint.axd";

pub fn train(ctx: &mut RunContext) -> Result<TrainSummary> {
    let examples = load_dataset(ctx, true)?.examples();
    let cfg = ctx.cfg.train.clone();
    train_into(ctx, &examples, &cfg, "")
}

/// One training run per configured gamma, each in `gamma_<value>/`.
pub fn sweep_gamma(ctx: &mut RunContext) -> Result<Vec<TrainSummary>> {
    let gammas = ctx.cfg.sweep.gammas.clone();
    if gammas.is_empty() {
        bail!("sweep.gammas is empty");
    }
    let examples = load_dataset(ctx, true)?.examples();
    let mut rows = Vec::with_capacity(gammas.len());
    let mut table = String::from("gamma,best_epoch,precision,recall,f1,val_predictions,status\n");
    for gamma in gammas {
        let cfg = TrainConfig {
            gamma,
            ..ctx.cfg.train.clone()
        };
        eprintln!("gamma = {gamma}");
        let row = train_into(ctx, &examples, &cfg, &format!("gamma_{gamma}/"))?;
        table.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6},{},{}\n",
            row.gamma, row.best_epoch, row.precision, row.recall, row.f1, row.val_predictions, row.status
        ));
        rows.push(row);
    }
    ctx.write("sweep.csv", table.as_bytes())?;
    ctx.write_json("sweep.json", &rows)?;
    Ok(rows)
}

fn initial_model(ctx: &mut RunContext) -> Result<DetectorModel> {
    match ctx.cfg.paths.checkpoint.clone() {
        None => Ok(DetectorModel::new(ctx.cfg.model, ctx.cfg.seed)?),
        Some(path) => {
            let model = read_checkpoint(&path)?;
            if *model.config() != ctx.cfg.model {
                bail!(
                    "checkpoint {} was built for a different [model] section than the config",
                    path.display()
                );
            }
            ctx.record_input("checkpoint", file_digest(&path)?)?;
            Ok(model)
        }
    }
}

fn train_into(ctx: &mut RunContext, examples: &[Example], cfg: &TrainConfig, prefix: &str) -> Result<TrainSummary> {
    let mut model = initial_model(ctx)?;
    let n_parameters = model.network.n_parameters();
    let mut report = |r: &HistoryRow| {
        eprintln!(
            "epoch {:>4}  loss {:.6}  val P {:.3} R {:.3} F1 {:.3}  peaks {}",
            r.epoch, r.loss, r.val_precision, r.val_recall, r.val_f1, r.val_predictions
        )
    };
    let outcome = train_with_progress(model, examples, cfg, &ctx.cfg.peaks, &mut report)?;

    let checkpoint = format!("{prefix}{CHECKPOINT_FILE}");
    axledet_core::detector::write_checkpoint(&ctx.path(&checkpoint), &outcome.model)?;
    ctx.track(checkpoint);
    let history = format!("{prefix}history.csv");
    write_history_csv(&ctx.path(&history), &outcome.history)?;
    ctx.track(history);
    ctx.write_json(&format!("{prefix}split.json"), &outcome.split)?;

    let summary = TrainSummary {
        gamma: cfg.gamma,
        best_epoch: outcome.best_epoch,
        epochs_completed: outcome.model.manifest.epochs_completed,
        precision: outcome.best.val_precision,
        recall: outcome.best.val_recall,
        f1: outcome.best.val_f1,
        val_predictions: outcome.best.val_predictions,
        status: if outcome.collapsed { "unusable" } else { "ok" }.to_string(),
        n_parameters,
        data_fingerprint: outcome.model.manifest.data_fingerprint.clone(),
    };
    ctx.write_json(&format!("{prefix}summary.json"), &summary)?;
    Ok(summary)
}
