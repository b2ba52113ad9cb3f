use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use tempfile::TempDir;

fn exomotion(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exomotion"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = exomotion(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A small raw corpus shared by the tests: 6 trials per class for each of
/// three subjects.
fn corpus() -> &'static Path {
    static DIR: OnceLock<TempDir> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let raw = dir.path().join("raw");
        ok(&["synth", "--out", s(&raw), "--per-class", "6", "--subjects", "3", "--seed", "4"]);
        dir
    })
    .path()
}

fn raw_manifest() -> PathBuf {
    corpus().join("raw/manifest.jsonl")
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn files_in(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn synth_writes_every_trial_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        ok(&["synth", "--out", s(out), "--per-class", "2", "--subjects", "2", "--seed", "9"]);
    }
    let files = files_in(&a);
    assert_eq!(files.len(), 2 * 5 * 2 + 1);
    assert_eq!(files, files_in(&b));
    let manifest = fs::read_to_string(a.join("manifest.jsonl")).unwrap();
    assert_eq!(manifest.lines().count(), 20);
}

#[test]
fn synth_rejects_zero_trials_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let res = exomotion(&["synth", "--out", s(&out), "--per-class", "0"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn preprocess_logs_filters_and_normalizes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("clean");
    ok(&["preprocess", "--manifest", s(&raw_manifest()), "--out", s(&out)]);
    let log = read_json(&out.join("preprocess_log.json"));
    assert_eq!(log["emg_filter"]["order"], 5);
    assert_eq!(log["emg_filter"]["low_cut_hz"], 0.2);
    assert_eq!(log["emg_filter"]["high_cut_hz"], 400.0);
    assert_eq!(log["imu_filter"]["order"], 5);
    assert_eq!(log["imu_filter"]["high_cut_hz"], 10.0);
    assert_eq!(log["trials"], 90);

    let manifest = fs::read_to_string(out.join("manifest.jsonl")).unwrap();
    assert!(manifest.lines().all(|l| l.contains("\"preprocessed\":true")));
    let first: serde_json::Value = serde_json::from_str(manifest.lines().next().unwrap()).unwrap();
    let text = fs::read_to_string(out.join(first["path"].as_str().unwrap())).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5000);
    assert_eq!(rows[0].len(), 35);
    for c in 0..35 {
        let mean = rows.iter().map(|r| r[c]).sum::<f64>() / 5000.0;
        let var = rows.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / 5000.0;
        assert!((var.sqrt() - 1.0).abs() < 1e-6, "channel {c}");
    }

    // A second pass over conditioned data is refused.
    let again = exomotion(&["preprocess", "--manifest", s(&out.join("manifest.jsonl")), "--out", s(&dir.path().join("x"))]);
    assert_eq!(again.status.code(), Some(2));
}

#[test]
fn train_writes_checkpoints_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        ok(&[
            "train", "--manifest", s(&raw_manifest()), "--out", s(&out), "--modality", "emg", "--seeds", "2",
            "--epochs", "1", "--batch", "16", "--emit-plot-data",
        ]);
        out
    };
    let a = run("a");
    let b = run("b");
    let files = files_in(&a);
    let names: Vec<&str> = files.iter().map(|f| f.0.as_str()).collect();
    for expected in [
        "checkpoint_seed0.json",
        "checkpoint_seed1.json",
        "confusion_seed0.csv",
        "plot_data.csv",
        "report_cnn_emg.json",
        "reports.json",
        "summary.txt",
    ] {
        assert!(names.contains(&expected), "{expected} missing from {names:?}");
    }
    assert_eq!(files, files_in(&b));

    let report = read_json(&a.join("report_cnn_emg.json"));
    assert_eq!(report["seeds"], serde_json::json!([0, 1]));
    let accs: Vec<f64> = report["per_seed"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["metrics"]["accuracy"].as_f64().unwrap())
        .collect();
    let mean = report["mean_accuracy"].as_f64().unwrap();
    assert!((mean - (accs[0] + accs[1]) / 2.0).abs() < 1e-12);
    let ckpt = read_json(&a.join("checkpoint_seed0.json"));
    assert_eq!(ckpt["model"]["def"]["input_channels"], 8);
}

#[test]
fn robust_emits_baseline_plus_one_report_per_sensor() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    ok(&[
        "robust", "--manifest", s(&raw_manifest()), "--out", s(&out), "--seeds", "2", "--epochs", "1",
        "--sensors", "imu_rfoot,imu_lshank,imu_rshank,emg_left,emg_right",
    ]);
    let reports = read_json(&out.join("reports.json"));
    let masks: Vec<&str> = reports
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["condition"]["mask"].as_str().unwrap())
        .collect();
    assert_eq!(masks, ["none", "imu_rfoot", "imu_lshank", "imu_rshank", "emg_left", "emg_right"]);
    assert!(out.join("report_mask_none.json").exists());
}

#[test]
fn transfer_runs_all_modes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t");
    ok(&[
        "transfer", "--manifest", s(&raw_manifest()), "--out", s(&out), "--seeds", "2", "--epochs", "1",
        "--pretrain-subjects", "0,1", "--target-subject", "2", "--finetune-per-class", "2",
    ]);
    let reports = read_json(&out.join("reports.json"));
    let modes: Vec<&str> = reports
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["condition"]["transfer_mode"].as_str().unwrap())
        .collect();
    assert_eq!(modes, ["pretrain-only", "finetune-only", "pretrain-plus-finetune", "original"]);
    // The target evaluation set excludes the 10 finetuning trials.
    assert_eq!(reports[0]["per_seed"][0]["test_size"], 20);
}

#[test]
fn ablate_includes_random_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ab");
    ok(&[
        "ablate", "--manifest", s(&raw_manifest()), "--out", s(&out), "--seeds", "2", "--epochs", "1", "--model",
        "cnn", "--modality", "imu",
    ]);
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("cnn_imu"), "{summary}");
    assert!(summary.contains("random"), "{summary}");
}

#[test]
fn invalid_combinations_fail_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    for args in [
        vec!["train", "--manifest", s(&raw_manifest()), "--out", s(&out), "--sensors", "emg_left"],
        vec!["train", "--manifest", s(&raw_manifest()), "--out", s(&out), "--model", "gru"],
        vec!["robust", "--manifest", s(&raw_manifest()), "--out", s(&out), "--sensors", "imu_head"],
        vec!["transfer", "--manifest", s(&raw_manifest()), "--out", s(&out), "--target-subject", "0"],
    ] {
        let res = exomotion(&args);
        assert_eq!(res.status.code(), Some(2), "{args:?}");
        assert!(!out.exists());
    }
    let missing = exomotion(&["train", "--manifest", s(&dir.path().join("nope.jsonl")), "--out", s(&out)]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("c");
    fs::write(
        &cfg,
        format!(
            "manifest = {:?}\nout = {:?}\nseeds = 2\nepochs = 1\nmodality = \"single-leg\"\nsensors = \"emg_left\"\n",
            s(&raw_manifest()),
            s(&out)
        ),
    )
    .unwrap();
    ok(&["train", "--config", s(&cfg), "--batch", "30"]);
    let report = read_json(&out.join("report_cnn_single_leg.json"));
    assert_eq!(report["condition"]["modality"], "single-leg-right");
}
