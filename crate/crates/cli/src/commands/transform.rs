use anyhow::{anyhow, Result};
use axledet_core::io::read_passage;
use axledet_core::scalogram::scale_grid;

use crate::context::RunContext;
use crate::data::{load_dataset, scalogram_file, Signal, SCALOGRAM_DIR, WAVELETS_FILE};

/// Builds the scalogram cache and the scalogram figure data for one
/// passage (the first one unless `fig4_passage` names another).
pub fn transform(ctx: &mut RunContext, fig4_passage: Option<&str>) -> Result<usize> {
    let dataset = load_dataset(ctx, false)?;
    let mut index = String::from("passage_id,sensor,window_start,n_samples,n_axles\n");
    for s in &dataset.signals {
        let e = &s.example;
        let rel = format!("{SCALOGRAM_DIR}/{}", scalogram_file(&e.passage_id, e.sensor));
        ctx.write(&rel, &e.scalogram.to_bytes())?;
        index.push_str(&format!(
            "{},{},{},{},{}\n",
            e.passage_id,
            e.sensor,
            e.scalogram.window_start,
            e.scalogram.n_samples(),
            e.ground_truth().len()
        ));
    }
    ctx.write(&format!("{SCALOGRAM_DIR}/index.csv"), index.as_bytes())?;
    let wavelets = ctx.cfg.wavelets.clone();
    ctx.write_json(&format!("{SCALOGRAM_DIR}/{WAVELETS_FILE}"), &wavelets)?;

    let chosen = match fig4_passage {
        Some(id) => dataset
            .signals
            .iter()
            .find(|s| s.example.passage_id == id && s.example.sensor == 0)
            .ok_or_else(|| anyhow!("passage {id} is not in the labeled dataset"))?,
        None => &dataset.signals[0],
    };
    write_figure(ctx, chosen)?;
    Ok(dataset.signals.len())
}

/// `fig4_signal.csv` (window samples, acceleration, target) and
/// `fig4_scalogram.csv` (long format, one row per sample, channel, scale).
fn write_figure(ctx: &mut RunContext, signal: &Signal) -> Result<()> {
    let e = &signal.example;
    let record = read_passage(&ctx.cfg.paths.dataset, &e.passage_id)?;
    let start = e.scalogram.window_start;
    let mut text = String::from("sample,acceleration,target\n");
    for (i, &y) in e.targets.iter().enumerate() {
        text.push_str(&format!("{},{:e},{y}\n", start + i, record.accel[[start + i, e.sensor]]));
    }
    ctx.write("fig4_signal.csv", text.as_bytes())?;

    let mut text = String::from("sample,channel,family,scale,value\n");
    let grids: Vec<(String, Vec<f64>)> = ctx
        .cfg
        .wavelets
        .iter()
        .map(|w| (w.family.to_string(), scale_grid(w)))
        .collect();
    for ((t, f, c), v) in e.scalogram.data.indexed_iter() {
        let (family, grid) = &grids[c];
        text.push_str(&format!("{},{c},{family},{},{v:.6}\n", start + t, grid[f]));
    }
    ctx.write("fig4_scalogram.csv", text.as_bytes())?;
    Ok(())
}
