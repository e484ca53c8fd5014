use anyhow::Result;
use axledet_core::io::{passage_paths, write_labels, write_passage, LabelDocument, LABEL_SUFFIX};
use axledet_core::synth::simulate_passage;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::context::RunContext;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSummary {
    pub passages: usize,
    pub axles: usize,
    pub sensors: usize,
}

pub fn synth(ctx: &mut RunContext) -> Result<SynthSummary> {
    let synth = ctx.cfg.synth.clone();
    synth.validate()?;
    let generated: Vec<_> = ctx.install(|| {
        (0..synth.n_passages)
            .into_par_iter()
            .map(|i| simulate_passage(&synth.scenario(i)))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut summary = SynthSummary {
        passages: 0,
        axles: 0,
        sensors: 0,
    };
    for (record, labels) in &generated {
        write_passage(&ctx.out, record)?;
        let doc = LabelDocument::new(&record.id, record.n_samples(), record.sample_rate, labels);
        write_labels(&ctx.out, &doc)?;
        let (meta, matrix) = passage_paths(&ctx.out, &record.id);
        for p in [meta, matrix] {
            ctx.track(p.file_name().unwrap().to_string_lossy().into_owned());
        }
        ctx.track(format!("{}{LABEL_SUFFIX}", record.id));
        summary.passages += 1;
        summary.axles += labels.n_axles();
        summary.sensors = summary.sensors.max(record.n_sensors());
    }
    ctx.write_json("synth_summary.json", &summary)?;
    Ok(summary)
}
