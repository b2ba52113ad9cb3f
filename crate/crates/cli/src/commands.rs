use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use exomotion::dataset::{
    generate_synthetic_trial, load_trial_csv_as, read_manifest, trial_file_name, write_manifest, write_trial_csv_file,
    ChannelMap, CorpusSpec, ManifestEntry, Preprocessor, SensorMask, Trial,
};
use exomotion::dsp::{FilterSpec, HampelConfig};
use exomotion::experiments::{
    run_modality_ablation, run_robustness_study, run_training, run_transfer_study, AblationOptions, Condition,
    ExperimentReport, SeedResult, TransferMode, TransferPlan,
};
use exomotion::models::save_checkpoint;
use exomotion::nn::TrainConfig;

use crate::options::RunConfig;
use crate::output::{condition_key, confusion_csv, plot_csv, summary_table, write_json, write_text};
use crate::CliError;

fn create_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| exomotion::Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

fn manifest_bytes(entries: &[ManifestEntry]) -> Result<Vec<u8>, CliError> {
    let mut bytes = Vec::new();
    write_manifest(entries, &mut bytes)?;
    Ok(bytes)
}

pub fn synth(cfg: &RunConfig) -> Result<(), CliError> {
    let spec = CorpusSpec {
        per_class: cfg.per_class,
        subjects: cfg.subjects,
        seed: cfg.corpus_seed,
    };
    create_out_dir(&cfg.out)?;
    let map = ChannelMap::canonical();
    let entries = spec
        .plan()
        .into_par_iter()
        .map(|(label, subject, index, seed)| {
            let trial = generate_synthetic_trial(label, subject, seed);
            let name = trial_file_name(subject, label, index);
            write_trial_csv_file(&trial, &map, &cfg.out.join(&name))?;
            Ok(ManifestEntry {
                path: PathBuf::from(name),
                label,
                subject,
                preprocessed: false,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    exomotion::fsutil::write_atomic(&cfg.out.join("manifest.jsonl"), &manifest_bytes(&entries)?)?;
    println!("wrote {} trials to {}", entries.len(), cfg.out.display());
    Ok(())
}

#[derive(Serialize)]
struct PreprocessLog {
    emg_filter: FilterSpec,
    imu_filter: FilterSpec,
    zero_phase: bool,
    hampel: HampelConfig,
    normalization: &'static str,
    trials: usize,
}

fn manifest_path(cfg: &RunConfig) -> &Path {
    cfg.manifest.as_deref().expect("resolve() requires a manifest for this command")
}

pub fn preprocess(cfg: &RunConfig) -> Result<(), CliError> {
    let manifest = manifest_path(cfg);
    let entries = read_manifest(manifest)?;
    if entries.is_empty() {
        return Err(CliError::Usage(format!("{} lists no trials", manifest.display())));
    }
    if let Some(done) = entries.iter().find(|e| e.preprocessed) {
        return Err(CliError::Usage(format!("{} is already preprocessed", done.path.display())));
    }
    let pre = Preprocessor::standard();
    let map = ChannelMap::canonical();
    create_out_dir(&cfg.out)?;
    let written = entries
        .par_iter()
        .map(|e| {
            let raw = load_trial_csv_as(&e.path, &map, e.label, e.subject, false)?;
            let clean = pre.process(&raw, &map)?;
            let name = e
                .path
                .file_name()
                .ok_or_else(|| CliError::Usage(format!("{} has no file name", e.path.display())))?;
            write_trial_csv_file(&clean, &map, &cfg.out.join(name))?;
            Ok(ManifestEntry {
                path: PathBuf::from(name),
                label: e.label,
                subject: e.subject,
                preprocessed: true,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    exomotion::fsutil::write_atomic(&cfg.out.join("manifest.jsonl"), &manifest_bytes(&written)?)?;
    write_json(
        &cfg.out.join("preprocess_log.json"),
        &PreprocessLog {
            emg_filter: pre.emg_spec,
            imu_filter: pre.imu_spec,
            zero_phase: true,
            hampel: pre.hampel,
            normalization: "per-channel zero mean, unit variance",
            trials: written.len(),
        },
    )?;
    println!("preprocessed {} trials into {}", written.len(), cfg.out.display());
    Ok(())
}

/// Loads the manifest's trials, conditioning raw ones on the way in.
fn load_trials(cfg: &RunConfig) -> Result<Vec<Trial>, CliError> {
    let manifest = manifest_path(cfg);
    let entries = read_manifest(manifest)?;
    if entries.is_empty() {
        return Err(CliError::Usage(format!("{} lists no trials", manifest.display())));
    }
    let pre = Preprocessor::standard();
    let map = ChannelMap::canonical();
    entries
        .par_iter()
        .map(|e| {
            let t = load_trial_csv_as(&e.path, &map, e.label, e.subject, e.preprocessed)?;
            Ok(if t.preprocessed { t } else { pre.process(&t, &map)? })
        })
        .collect()
}

fn seed_config(cfg: &RunConfig, seed: u64) -> TrainConfig {
    TrainConfig {
        seed,
        ..cfg.train.clone()
    }
}

/// Validates and writes each report, the summary table, and optionally the
/// plot data.
fn write_reports(cfg: &RunConfig, title: &str, reports: &[ExperimentReport]) -> Result<(), CliError> {
    for r in reports {
        r.validate()?;
    }
    for r in reports {
        write_json(&cfg.out.join(format!("report_{}.json", condition_key(r))), r)?;
    }
    write_json(&cfg.out.join("reports.json"), &reports)?;
    let table = summary_table(title, reports);
    write_text(&cfg.out.join("summary.txt"), &table)?;
    if cfg.emit_plot_data {
        write_text(&cfg.out.join("plot_data.csv"), &plot_csv(reports))?;
    }
    print!("{table}");
    Ok(())
}

pub fn train(cfg: &RunConfig) -> Result<(), CliError> {
    let trials = load_trials(cfg)?;
    let choice = cfg.models[0];
    let modality = cfg.modalities[0];
    let def = choice.def_for(modality);
    create_out_dir(&cfg.out)?;
    let per_seed = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let out = run_training(&trials, &def, modality, &seed_config(cfg, seed))?;
            save_checkpoint(&out.model, &cfg.out.join(format!("checkpoint_seed{seed}.json")))?;
            write_text(&cfg.out.join(format!("confusion_seed{seed}.csv")), &confusion_csv(&out.metrics))?;
            Ok(SeedResult {
                seed,
                test_size: out.test_indices.len(),
                epoch_losses: out.history.epochs.iter().map(|e| e.mean_loss).collect(),
                metrics: out.metrics,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let report = ExperimentReport::new(
        "train",
        Condition {
            model: Some(choice.kind.name().into()),
            modality: Some(modality),
            ..Condition::default()
        },
        per_seed,
    )?;
    write_reports(cfg, "training", std::slice::from_ref(&report))
}

pub fn ablate(cfg: &RunConfig) -> Result<(), CliError> {
    let trials = load_trials(cfg)?;
    create_out_dir(&cfg.out)?;
    let opts = AblationOptions {
        models: cfg.models.clone(),
        modalities: cfg.modalities.clone(),
        train: cfg.train.clone(),
    };
    let reports = run_modality_ablation(&trials, &cfg.seeds, &opts)?;
    write_reports(cfg, "modality ablation", &reports)
}

pub fn transfer(cfg: &RunConfig) -> Result<(), CliError> {
    let trials = load_trials(cfg)?;
    let t = &cfg.transfer;
    let plan = TransferPlan {
        pretrain_subjects: t.pretrain_subjects.clone(),
        target_subject: t.target_subject,
        finetune_per_class: t.finetune_per_class,
        mode: TransferMode::PretrainPlusFinetune,
    };
    create_out_dir(&cfg.out)?;
    let study = run_transfer_study(&trials, &plan, &TransferMode::ALL, &cfg.seeds, &cfg.train)?;
    if !study.frozen_layers_unchanged {
        return Err(CliError::Check("frozen layers changed during finetuning".into()));
    }
    write_reports(cfg, "transfer", &study.reports)
}

pub fn robust(cfg: &RunConfig) -> Result<(), CliError> {
    let trials = load_trials(cfg)?;
    let conditions: Vec<SensorMask> = std::iter::once(SensorMask::none())
        .chain(cfg.sensors.iter().map(|&u| SensorMask::single(u)))
        .collect();
    create_out_dir(&cfg.out)?;
    let reports = run_robustness_study(&trials, &cfg.seeds, &cfg.train, &conditions)?;
    write_reports(cfg, "sensor robustness", &reports)
}
