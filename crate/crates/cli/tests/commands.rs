mod common;

use std::process::Command;

use axledet::commands::{velocity_histogram, CHECKPOINT_FILE};
use axledet::{CommandOutput, CommandSpec, RunContext, SplitSelection, MANIFEST_FILE};
use axledet_core::io::{read_passage, write_passage};
use common::{csv_rows, read, run, tiny};
use tempfile::tempdir;

const BIN: &str = env!("CARGO_BIN_EXE_axledet");

#[test]
fn synth_is_deterministic() {
    let tmp = tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let mut cfg = tiny(&a);
    cfg.synth.n_passages = 8;
    cfg.synth.seed = 7;
    let (out_a, man_a) = run(&cfg, &a, CommandSpec::Synth);
    let (_, man_b) = run(&cfg, &b, CommandSpec::Synth);
    let CommandOutput::Synth(summary) = out_a else { panic!() };
    assert_eq!(summary.passages, 8);
    // metadata, matrix and label file per passage, plus the summary
    assert_eq!(man_a.outputs.len(), 8 * 3 + 2);
    assert_eq!(man_a.outputs, man_b.outputs);
}

#[test]
fn empty_synth_is_an_error() {
    let tmp = tempdir().unwrap();
    let mut cfg = tiny(tmp.path());
    cfg.synth.n_passages = 0;
    let err = RunContext::new(cfg, tmp.path().to_path_buf())
        .and_then(|ctx| axledet::execute(ctx, &CommandSpec::Synth))
        .unwrap_err();
    assert!(format!("{err:#}").contains("empty dataset requested"), "{err:#}");
}

#[test]
fn labeling_counts_rejections_and_bins_velocities() {
    let tmp = tempdir().unwrap();
    let data = tmp.path().join("data");
    let cfg = tiny(&data);
    run(&cfg, &data, CommandSpec::Synth);

    let labels = tmp.path().join("labels");
    let (out, _) = run(&cfg, &labels, CommandSpec::Label);
    let CommandOutput::Label(all_valid) = out else { panic!() };
    assert_eq!(all_valid.accepted_ratio, 1.0);
    let accepted_axles: usize = csv_rows(labels.join("label_status.csv"))
        .iter()
        .map(|r| r[2].parse::<usize>().unwrap())
        .sum();
    let binned: usize = csv_rows(labels.join("velocity_histogram.csv"))
        .iter()
        .map(|r| r[2].parse::<usize>().unwrap())
        .sum();
    assert_eq!(binned, accepted_axles);
    assert!(accepted_axles > 0);

    // drop the last pulse of G2 in one passage
    let mut record = read_passage(&data, "syn00003").unwrap();
    let mut g2 = record.wheel_load.column_mut(1);
    let last = (0..g2.len()).rev().find(|&i| g2[i] > 0.0).unwrap();
    for i in last.saturating_sub(10)..=last {
        g2[i] = 0.0;
    }
    write_passage(&data, &record).unwrap();
    let relabeled = tmp.path().join("relabeled");
    let (out, _) = run(&cfg, &relabeled, CommandSpec::Label);
    let CommandOutput::Label(summary) = out else { panic!() };
    assert_eq!(summary.stats.rejected, 1);
    assert_eq!(summary.stats.accepted + summary.stats.rejected, 10);
    let status = csv_rows(relabeled.join("label_status.csv"));
    let row = status.iter().find(|r| r[0] == "syn00003").unwrap();
    assert_eq!(row[1], "rejected");
    assert!(row[3].contains("mismatch"), "{row:?}");
}

#[test]
fn histogram_bins_are_two_metres_per_second_wide() {
    let text = velocity_histogram(&[0.5, 1.9, 2.0, 13.0]);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "velocity_from,velocity_to,axles");
    assert_eq!(rows[1], "0,2,2");
    assert_eq!(rows[2], "2,4,1");
    assert_eq!(rows.last().unwrap(), &"12,14,1");
}

#[test]
fn transform_outputs_do_not_depend_on_worker_count() {
    let tmp = tempdir().unwrap();
    let data = tmp.path().join("data");
    let mut cfg = tiny(&data);
    cfg.synth.n_passages = 3;
    run(&cfg, &data, CommandSpec::Synth);
    cfg.deterministic = false;
    let spec = CommandSpec::Transform {
        fig4_passage: Some("syn00001".into()),
    };
    cfg.workers = 1;
    let (_, one) = run(&cfg, &tmp.path().join("one"), spec.clone());
    cfg.workers = 3;
    let (_, three) = run(&cfg, &tmp.path().join("three"), spec);
    assert_eq!(three.workers, 3);
    let skip_config = |m: &axledet::RunManifest| {
        m.outputs
            .iter()
            .filter(|(k, _)| k.as_str() != "config.toml")
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect::<Vec<_>>()
    };
    assert_eq!(skip_config(&one), skip_config(&three));
    let fig = csv_rows(tmp.path().join("one/fig4_scalogram.csv"));
    assert!(fig.iter().all(|r| (0.0..=1.0).contains(&r[4].parse::<f64>().unwrap())));
}

#[test]
fn resumed_training_continues_epoch_numbers() {
    let tmp = tempdir().unwrap();
    let data = tmp.path().join("data");
    let mut cfg = tiny(&data);
    run(&cfg, &data, CommandSpec::Synth);
    let first = tmp.path().join("first");
    let (out, _) = run(&cfg, &first, CommandSpec::Train);
    let CommandOutput::Train(a) = out else { panic!() };
    assert_eq!(a.epochs_completed, 2);

    cfg.paths.checkpoint = Some(first.join(CHECKPOINT_FILE));
    let second = tmp.path().join("second");
    let (out, manifest) = run(&cfg, &second, CommandSpec::Train);
    let CommandOutput::Train(b) = out else { panic!() };
    assert_eq!(b.epochs_completed, 4);
    let epochs: Vec<String> = csv_rows(second.join("history.csv")).iter().map(|r| r[0].clone()).collect();
    assert_eq!(epochs, ["3", "4"]);
    assert!(manifest.inputs.contains_key("checkpoint"));

    cfg.model.base_feature_maps = 3;
    let err = RunContext::new(cfg, tmp.path().join("third"))
        .and_then(|ctx| axledet::execute(ctx, &CommandSpec::Train))
        .unwrap_err();
    assert!(format!("{err:#}").contains("[model]"), "{err:#}");
}

#[test]
fn single_gamma_sweep_matches_training() {
    let tmp = tempdir().unwrap();
    let data = tmp.path().join("data");
    let mut cfg = tiny(&data);
    run(&cfg, &data, CommandSpec::Synth);
    cfg.sweep.gammas = vec![cfg.train.gamma];
    let (out, _) = run(&cfg, &tmp.path().join("train"), CommandSpec::Train);
    let CommandOutput::Train(trained) = out else { panic!() };
    let sweep_dir = tmp.path().join("sweep");
    let (out, _) = run(&cfg, &sweep_dir, CommandSpec::SweepGamma);
    let CommandOutput::SweepGamma(rows) = out else { panic!() };
    assert_eq!(rows, vec![trained.clone()]);
    let table = csv_rows(sweep_dir.join("sweep.csv"));
    assert_eq!(table.len(), 1);
    assert_eq!(table[0][1], trained.best_epoch.to_string());
    assert!(sweep_dir.join(format!("gamma_{}/{CHECKPOINT_FILE}", cfg.train.gamma)).exists());
}

#[test]
fn evaluation_reports_every_threshold_and_is_reproducible() {
    let tmp = tempdir().unwrap();
    let data = tmp.path().join("data");
    let mut cfg = tiny(&data);
    run(&cfg, &data, CommandSpec::Synth);
    let train_dir = tmp.path().join("train");
    run(&cfg, &train_dir, CommandSpec::Train);
    cfg.paths.checkpoint = Some(train_dir.join(CHECKPOINT_FILE));

    let eval_dir = tmp.path().join("eval");
    let spec = CommandSpec::Evaluate {
        split: SplitSelection::All,
    };
    let (out, _) = run(&cfg, &eval_dir, spec);
    let CommandOutput::Evaluate(summary) = out else { panic!() };
    let labels: Vec<&str> = summary.thresholds.iter().map(|t| t.threshold.as_str()).collect();
    assert_eq!(labels, ["20samples", "200cm", "37cm", "20cm"]);
    assert_eq!(summary.passages, 10);
    let report = read(eval_dir.join("report.csv"));
    assert!(report.starts_with(
        "passage_id,sensor,threshold,tp,fp,fn,precision,recall,f1,mean_abs_temporal_err,mean_abs_spatial_err\n"
    ));
    assert_eq!(report.lines().count(), 1 + 4 * summary.signals);

    let (_, _, rerun) = axledet::rerun(&eval_dir.join(MANIFEST_FILE), tmp.path().join("again"), None).unwrap();
    assert!(rerun.differing.is_empty() && rerun.missing.is_empty(), "{rerun:?}");

    let (out, _) = run(
        &cfg,
        &tmp.path().join("predict"),
        CommandSpec::Predict {
            split: SplitSelection::Test,
        },
    );
    let CommandOutput::Predict { signals } = out else { panic!() };
    assert!(signals > 0);
}

#[test]
fn binary_reports_failures_with_nonzero_status() {
    let tmp = tempdir().unwrap();
    let missing = Command::new(BIN)
        .args(["label", "--dataset"])
        .arg(tmp.path().join("nowhere"))
        .arg("--out")
        .arg(tmp.path().join("out"))
        .output()
        .unwrap();
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nowhere"));

    let bad_config = tmp.path().join("bad.toml");
    std::fs::write(&bad_config, "[train]\nepoch = 3\n").unwrap();
    let bad = Command::new(BIN).arg("config").arg("--config").arg(&bad_config).output().unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("epoch"));

    let no_checkpoint = Command::new(BIN)
        .args(["evaluate", "--out"])
        .arg(tmp.path().join("eval"))
        .output()
        .unwrap();
    assert!(!no_checkpoint.status.success());
    assert!(String::from_utf8_lossy(&no_checkpoint.stderr).contains("checkpoint"));
}

#[test]
fn binary_runs_synth_and_prints_a_summary() {
    let tmp = tempdir().unwrap();
    let config = tmp.path().join("c.toml");
    std::fs::write(&config, "[synth]\nn_passages = 2\nmax_axles = 3\n").unwrap();
    let out = Command::new(BIN)
        .args(["synth", "--deterministic", "--seed", "5", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(tmp.path().join("d"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["synth"]["passages"], 2);
    let manifest = read(tmp.path().join("d").join(MANIFEST_FILE));
    assert!(manifest.contains("\"synth\": 5"));
}
