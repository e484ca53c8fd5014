use anyhow::{anyhow, Result};
use axledet_core::detector::{read_checkpoint, DetectorModel};
use axledet_core::postprocess::{aggregate, evaluate as score, find_peaks, GroupBy, GroupMetrics, Quantiles, ScoredSignal, Threshold};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::context::RunContext;
use crate::data::{load_dataset, Dataset, Signal, SplitSelection};
use crate::manifest::file_digest;

struct Prediction<'a> {
    signal: &'a Signal,
    probabilities: Vec<f32>,
    peaks: Vec<usize>,
}

fn load_model(ctx: &mut RunContext) -> Result<DetectorModel> {
    let path = ctx
        .cfg
        .paths
        .checkpoint
        .clone()
        .ok_or_else(|| anyhow!("no checkpoint given: set paths.checkpoint or pass --checkpoint"))?;
    let model = read_checkpoint(&path)?;
    ctx.record_input("checkpoint", file_digest(&path)?)?;
    Ok(model)
}

fn run_detector<'a>(
    ctx: &RunContext,
    model: &DetectorModel,
    signals: &'a [&'a Signal],
) -> Result<Vec<Prediction<'a>>> {
    let peaks = ctx.cfg.peaks;
    ctx.install(|| {
        signals
            .par_iter()
            .map(|&signal| {
                let probabilities = model.predict(&signal.example.scalogram)?;
                let peaks = find_peaks(&probabilities, &peaks);
                Ok(Prediction {
                    signal,
                    probabilities,
                    peaks,
                })
            })
            .collect()
    })
}

/// Signals of `split`, cut the way the checkpoint's training run cut them.
fn selected<'a>(
    ctx: &RunContext,
    model: &DetectorModel,
    dataset: &'a Dataset,
    split: SplitSelection,
) -> Result<Vec<&'a Signal>> {
    let train_cfg = model.manifest.train_config.as_ref().unwrap_or(&ctx.cfg.train);
    let chosen = dataset.select(split, &train_cfg.split, train_cfg.split_seed);
    if chosen.is_empty() {
        return Err(anyhow!("the {split:?} split of this dataset is empty"));
    }
    Ok(chosen)
}

pub fn predict(ctx: &mut RunContext, split: SplitSelection) -> Result<usize> {
    let model = load_model(ctx)?;
    let dataset = load_dataset(ctx, true)?;
    let signals = selected(ctx, &model, &dataset, split)?;
    let predictions = run_detector(ctx, &model, &signals)?;
    let mut peaks_csv = String::from("passage_id,sensor,sample,probability\n");
    for p in &predictions {
        let e = &p.signal.example;
        let start = e.scalogram.window_start;
        let mut text = String::from("sample,probability,target\n");
        for (i, (&prob, &y)) in p.probabilities.iter().zip(&e.targets).enumerate() {
            text.push_str(&format!("{},{prob:.6},{y}\n", start + i));
        }
        ctx.write(&format!("predictions/{}_s{}.csv", e.passage_id, e.sensor), text.as_bytes())?;
        for &k in &p.peaks {
            peaks_csv.push_str(&format!("{},{},{},{:.6}\n", e.passage_id, e.sensor, start + k, p.probabilities[k]));
        }
    }
    ctx.write("peaks.csv", peaks_csv.as_bytes())?;
    Ok(predictions.len())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSummary {
    pub threshold: String,
    pub global: GroupMetrics,
    pub per_passage_precision: Quantiles,
    pub per_passage_recall: Quantiles,
    pub per_sensor_precision: Quantiles,
    pub per_sensor_recall: Quantiles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSummary {
    pub split: SplitSelection,
    pub signals: usize,
    pub passages: usize,
    pub thresholds: Vec<ThresholdSummary>,
}

impl EvaluationSummary {
    pub fn at(&self, label: &str) -> Option<&ThresholdSummary> {
        self.thresholds.iter().find(|t| t.threshold == label)
    }
}

/// Scores the selected split under every configured threshold and writes
/// `report.csv`, `summary.json`, `deviations.csv` and `distribution.csv`.
pub fn evaluate(ctx: &mut RunContext, split: SplitSelection) -> Result<EvaluationSummary> {
    let model = load_model(ctx)?;
    let dataset = load_dataset(ctx, true)?;
    let signals = selected(ctx, &model, &dataset, split)?;
    let predictions = run_detector(ctx, &model, &signals)?;

    let thresholds: Vec<Threshold> = ctx
        .cfg
        .evaluate
        .sample_thresholds
        .iter()
        .map(|&n| Threshold::Samples(n))
        .chain(ctx.cfg.evaluate.meter_thresholds.iter().map(|&m| Threshold::Meters(m)))
        .collect();

    let mut report = String::from(
        "passage_id,sensor,threshold,tp,fp,fn,precision,recall,f1,mean_abs_temporal_err,mean_abs_spatial_err\n",
    );
    let mut deviations = String::from("threshold,passage_id,sensor,gt_sample,pred_sample,temporal_err,spatial_err_m\n");
    let mut distribution = String::from("threshold,group_by,key,tp,fp,fn,precision,recall,f1\n");
    let mut summaries = Vec::with_capacity(thresholds.len());
    for threshold in thresholds {
        let label = threshold.to_string();
        let mut scored = Vec::with_capacity(predictions.len());
        for p in &predictions {
            let e = &p.signal.example;
            let r = score(&p.peaks, &e.ground_truth(), &p.signal.velocities, p.signal.sample_rate, threshold)?;
            let start = e.scalogram.window_start;
            report.push_str(&format!(
                "{},{},{label},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
                e.passage_id,
                e.sensor,
                r.true_positives(),
                r.false_positives.len(),
                r.false_negatives.len(),
                r.precision,
                r.recall,
                r.f1,
                r.mean_abs_temporal_error,
                r.mean_abs_spatial_error.unwrap_or(0.0),
            ));
            for m in &r.matches {
                deviations.push_str(&format!(
                    "{label},{},{},{},{},{},{:.6}\n",
                    e.passage_id,
                    e.sensor,
                    start + m.gt_index,
                    start + m.pred_index,
                    m.temporal_error,
                    m.spatial_error.unwrap_or(0.0)
                ));
            }
            scored.push(ScoredSignal {
                passage_id: e.passage_id.clone(),
                sensor: e.sensor,
                report: r,
            });
        }
        let global = aggregate(&scored, GroupBy::Global)?;
        let per_passage = aggregate(&scored, GroupBy::PerPassage)?;
        let per_sensor = aggregate(&scored, GroupBy::PerSensor)?;
        for (name, s) in [("passage", &per_passage), ("sensor", &per_sensor)] {
            for g in &s.groups {
                distribution.push_str(&format!(
                    "{label},{name},{},{},{},{},{:.6},{:.6},{:.6}\n",
                    g.key, g.tp, g.fp, g.fn_, g.precision, g.recall, g.f1
                ));
            }
        }
        summaries.push(ThresholdSummary {
            threshold: label,
            global: global.groups.into_iter().next().expect("one global group"),
            per_passage_precision: per_passage.precision,
            per_passage_recall: per_passage.recall,
            per_sensor_precision: per_sensor.precision,
            per_sensor_recall: per_sensor.recall,
        });
    }

    ctx.write("report.csv", report.as_bytes())?;
    ctx.write("deviations.csv", deviations.as_bytes())?;
    ctx.write("distribution.csv", distribution.as_bytes())?;
    let mut passages: Vec<&str> = signals.iter().map(|s| s.example.passage_id.as_str()).collect();
    passages.dedup();
    let summary = EvaluationSummary {
        split,
        signals: signals.len(),
        passages: passages.len(),
        thresholds: summaries,
    };
    ctx.write_json("summary.json", &summary)?;
    Ok(summary)
}
