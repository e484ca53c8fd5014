use anyhow::{bail, Context, Result};
use axledet_core::ingest::{label_passage, IngestStats, LabelOutcome};
use axledet_core::io::{list_passages, read_passage, write_labels, LabelDocument, LABEL_SUFFIX};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::context::RunContext;
use crate::manifest::fingerprint_files;

/// Width of the velocity histogram bins, m/s.
pub const VELOCITY_BIN: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSummary {
    pub stats: IngestStats,
    pub accepted_ratio: f64,
}

pub fn label(ctx: &mut RunContext) -> Result<LabelSummary> {
    let dir = ctx.cfg.paths.dataset.clone();
    let ids = list_passages(&dir).with_context(|| format!("listing passages in {}", dir.display()))?;
    if ids.is_empty() {
        bail!("no passages (*.meta.toml) found in {}", dir.display());
    }
    let params = ctx.cfg.labels;
    let outcomes: Vec<_> = ctx.install(|| {
        ids.par_iter()
            .map(|id| {
                let record = read_passage(&dir, id)?;
                let outcome = label_passage(&record, &params)?;
                Ok::<_, axledet_core::Error>((record, outcome))
            })
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut files = Vec::new();
    for id in &ids {
        let (meta, matrix) = axledet_core::io::passage_paths(&dir, id);
        files.extend([meta, matrix]);
    }
    ctx.record_input("dataset", fingerprint_files(&files)?)?;

    let mut stats = IngestStats::default();
    let mut status = String::from("passage_id,status,n_axles,reason\n");
    let mut velocities = Vec::new();
    for (record, outcome) in &outcomes {
        stats.record(&record.id, outcome);
        match outcome {
            LabelOutcome::Accepted(labels) => {
                let doc = LabelDocument::new(&record.id, record.n_samples(), record.sample_rate, labels);
                write_labels(&ctx.out, &doc)?;
                ctx.track(format!("{}{LABEL_SUFFIX}", record.id));
                velocities.extend_from_slice(&labels.axle_velocities);
                status.push_str(&format!("{},accepted,{},\n", record.id, labels.n_axles()));
            }
            LabelOutcome::Rejected(reason) => {
                status.push_str(&format!("{},rejected,0,{}\n", record.id, reason.to_string().replace(',', ";")));
            }
        }
    }
    ctx.write("label_status.csv", status.as_bytes())?;
    ctx.write("velocity_histogram.csv", velocity_histogram(&velocities).as_bytes())?;
    let summary = LabelSummary {
        accepted_ratio: stats.accepted_ratio(),
        stats,
    };
    ctx.write_json("ingest_summary.json", &summary)?;
    Ok(summary)
}

/// Axle counts in `VELOCITY_BIN`-wide bins from 0 to the fastest axle.
pub fn velocity_histogram(velocities: &[f64]) -> String {
    let mut out = String::from("velocity_from,velocity_to,axles\n");
    let max = velocities.iter().copied().fold(0.0, f64::max);
    let n_bins = ((max / VELOCITY_BIN).floor() as usize + 1).max(1);
    let mut counts = vec![0usize; n_bins];
    for &v in velocities {
        counts[((v / VELOCITY_BIN).floor() as usize).min(n_bins - 1)] += 1;
    }
    for (i, c) in counts.iter().enumerate() {
        out.push_str(&format!("{},{},{c}\n", i as f64 * VELOCITY_BIN, (i + 1) as f64 * VELOCITY_BIN));
    }
    out
}
