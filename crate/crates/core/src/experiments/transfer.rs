use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{Condition, ExperimentReport, SeedResult};
use super::source::TrialSource;
use super::training::{build_model, evaluate, run_training, ModelChoice};
use crate::dataset::{ModalitySelection, Trial, N_CLASSES};
use crate::models::{fit, freeze_feature_layers, ModelDef, ModelState, TrainHistory};
use crate::nn::TrainConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransferMode {
    /// Train on the source subjects, test on the target as is.
    PretrainOnly,
    /// Train from scratch on the target's few finetuning samples.
    FinetuneOnly,
    /// Pretrain, freeze the feature layers, then finetune on the target.
    PretrainPlusFinetune,
    /// Pool every subject and use the standard split.
    Original,
}

impl TransferMode {
    pub const ALL: [TransferMode; 4] = [
        TransferMode::PretrainOnly,
        TransferMode::FinetuneOnly,
        TransferMode::PretrainPlusFinetune,
        TransferMode::Original,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TransferMode::PretrainOnly => "pretrain-only",
            TransferMode::FinetuneOnly => "finetune-only",
            TransferMode::PretrainPlusFinetune => "pretrain-plus-finetune",
            TransferMode::Original => "original",
        }
    }
}

impl fmt::Display for TransferMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransferMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| Error::Argument(format!("unknown transfer mode {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferPlan {
    pub pretrain_subjects: BTreeSet<u32>,
    pub target_subject: u32,
    pub finetune_per_class: usize,
    pub mode: TransferMode,
}

impl TransferPlan {
    pub fn new(pretrain_subjects: impl IntoIterator<Item = u32>, target_subject: u32, mode: TransferMode) -> Self {
        Self {
            pretrain_subjects: pretrain_subjects.into_iter().collect(),
            target_subject,
            finetune_per_class: 10,
            mode,
        }
    }
}

/// Finetuning and evaluation indices on the target subject for one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSplit {
    pub finetune: Vec<usize>,
    pub evaluation: Vec<usize>,
}

/// Draws `per_class` finetuning trials of each class from the target
/// subject; every other target trial is kept for evaluation.
pub fn target_split(trials: &[Trial], target: u32, per_class: usize, seed: u64) -> Result<TargetSplit> {
    let mut by_class = vec![Vec::new(); N_CLASSES];
    for (i, t) in trials.iter().enumerate() {
        if t.subject_id == target {
            by_class[t.label.index()].push(i);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7A46_E7F1);
    let (mut finetune, mut evaluation) = (Vec::new(), Vec::new());
    for (c, mut members) in by_class.into_iter().enumerate() {
        if members.len() < per_class || (per_class == 0 && members.is_empty()) {
            return Err(Error::Data(format!(
                "target subject {target} has {} trials of class {c}, need {per_class} for finetuning",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        finetune.extend_from_slice(&members[..per_class]);
        evaluation.extend_from_slice(&members[per_class..]);
    }
    if evaluation.is_empty() {
        return Err(Error::Data(format!("target subject {target} has no trials left for evaluation")));
    }
    finetune.sort_unstable();
    evaluation.sort_unstable();
    Ok(TargetSplit { finetune, evaluation })
}

/// Reports for several transfer modes, sharing one pretraining run per seed.
#[derive(Debug, Clone)]
pub struct TransferStudy {
    pub reports: Vec<ExperimentReport>,
    /// Whether every frozen array came out of finetuning bit-identical.
    pub frozen_layers_unchanged: bool,
}

struct SeedOutcome {
    results: Vec<SeedResult>,
    frozen_unchanged: bool,
}

fn losses(h: &TrainHistory) -> Vec<f64> {
    h.epochs.iter().map(|e| e.mean_loss).collect()
}

fn validate_plan(trials: &[Trial], plan: &TransferPlan) -> Result<()> {
    if plan.pretrain_subjects.contains(&plan.target_subject) {
        return Err(Error::Argument(format!(
            "target subject {} is also a pretraining subject",
            plan.target_subject
        )));
    }
    if plan.pretrain_subjects.is_empty() {
        return Err(Error::Argument("no pretraining subjects".into()));
    }
    for s in &plan.pretrain_subjects {
        if !trials.iter().any(|t| t.subject_id == *s) {
            return Err(Error::Data(format!("pretraining subject {s} has no trials")));
        }
    }
    Ok(())
}

fn run_seed(
    trials: &[Trial],
    plan: &TransferPlan,
    modes: &[TransferMode],
    seed: u64,
    base: &TrainConfig,
) -> Result<SeedOutcome> {
    let cfg = TrainConfig {
        seed,
        ..base.clone()
    };
    let modality = ModalitySelection::All;
    let def: ModelDef = ModelChoice::cnn().def_for(modality);
    let source = TrialSource::new(trials, modality);
    let split = target_split(trials, plan.target_subject, plan.finetune_per_class, seed)?;
    let pretrain_idx: Vec<usize> = (0..trials.len())
        .filter(|&i| plan.pretrain_subjects.contains(&trials[i].subject_id))
        .collect();
    super::training::check_classes(trials, &pretrain_idx, "the pretraining set")?;

    let needs_pretrain = modes
        .iter()
        .any(|m| matches!(m, TransferMode::PretrainOnly | TransferMode::PretrainPlusFinetune));
    let pretrained: Option<(ModelState, TrainHistory)> = if needs_pretrain {
        let mut m = build_model(&def, seed)?;
        let h = fit(&mut m, &source, &pretrain_idx, &cfg)?;
        Some((m, h))
    } else {
        None
    };

    let mut frozen_unchanged = true;
    let mut results = Vec::with_capacity(modes.len());
    for &mode in modes {
        let result = match mode {
            TransferMode::PretrainOnly => {
                let (m, h) = pretrained.as_ref().expect("pretrained above");
                SeedResult {
                    seed,
                    metrics: evaluate(m, &source, &split.evaluation)?,
                    test_size: split.evaluation.len(),
                    epoch_losses: losses(h),
                }
            }
            TransferMode::PretrainPlusFinetune => {
                let mut m = pretrained.as_ref().expect("pretrained above").0.clone();
                freeze_feature_layers(&mut m)?;
                let before: Vec<_> = m.frozen.iter().map(|&i| m.params.layers[i].clone()).collect();
                let h = fit(&mut m, &source, &split.finetune, &cfg)?;
                let after: Vec<_> = m.frozen.iter().map(|&i| m.params.layers[i].clone()).collect();
                frozen_unchanged &= before == after;
                SeedResult {
                    seed,
                    metrics: evaluate(&m, &source, &split.evaluation)?,
                    test_size: split.evaluation.len(),
                    epoch_losses: losses(&h),
                }
            }
            TransferMode::FinetuneOnly => {
                let mut m = build_model(&def, seed)?;
                let h = fit(&mut m, &source, &split.finetune, &cfg)?;
                SeedResult {
                    seed,
                    metrics: evaluate(&m, &source, &split.evaluation)?,
                    test_size: split.evaluation.len(),
                    epoch_losses: losses(&h),
                }
            }
            TransferMode::Original => {
                let out = run_training(trials, &def, modality, &cfg)?;
                SeedResult {
                    seed,
                    test_size: out.test_indices.len(),
                    epoch_losses: losses(&out.history),
                    metrics: out.metrics,
                }
            }
        };
        results.push(result);
    }
    Ok(SeedOutcome {
        results,
        frozen_unchanged,
    })
}

/// Runs every mode in `modes` for each seed. `plan.mode` is ignored.
pub fn run_transfer_study(
    trials: &[Trial],
    plan: &TransferPlan,
    modes: &[TransferMode],
    seeds: &[u64],
    cfg: &TrainConfig,
) -> Result<TransferStudy> {
    validate_plan(trials, plan)?;
    let outcomes: Vec<SeedOutcome> = seeds
        .par_iter()
        .map(|&seed| run_seed(trials, plan, modes, seed, cfg))
        .collect::<Result<_>>()?;
    let frozen_layers_unchanged = outcomes.iter().all(|o| o.frozen_unchanged);
    let reports = modes
        .iter()
        .enumerate()
        .map(|(k, &mode)| {
            let per_seed = outcomes.iter().map(|o| o.results[k].clone()).collect();
            ExperimentReport::new(
                "transfer",
                Condition {
                    model: Some("cnn".into()),
                    modality: Some(ModalitySelection::All),
                    transfer_mode: Some(mode),
                    ..Condition::default()
                },
                per_seed,
            )
        })
        .collect::<Result<_>>()?;
    Ok(TransferStudy {
        reports,
        frozen_layers_unchanged,
    })
}

/// One transfer condition across seeds.
pub fn run_transfer(trials: &[Trial], plan: &TransferPlan, seeds: &[u64], cfg: &TrainConfig) -> Result<ExperimentReport> {
    let mut study = run_transfer_study(trials, plan, &[plan.mode], seeds, cfg)?;
    Ok(study.reports.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Label, N_SAMPLES};

    fn tiny_corpus(per_class: usize, subjects: u32) -> Vec<Trial> {
        let mut v = Vec::new();
        for s in 0..subjects {
            for l in Label::ALL {
                for _ in 0..per_class {
                    v.push(Trial::new(vec![0.0; 35 * N_SAMPLES], l, s, true).unwrap());
                }
            }
        }
        v
    }

    #[test]
    fn target_split_hygiene() {
        let trials = tiny_corpus(14, 3);
        let a = target_split(&trials, 2, 10, 1).unwrap();
        assert_eq!(a.finetune.len(), 50);
        assert_eq!(a.evaluation.len(), 20);
        assert!(a.finetune.iter().all(|i| !a.evaluation.contains(i)));
        assert!(a.finetune.iter().chain(&a.evaluation).all(|&i| trials[i].subject_id == 2));
        for l in Label::ALL {
            assert_eq!(a.finetune.iter().filter(|&&i| trials[i].label == l).count(), 10);
        }
        assert_eq!(a, target_split(&trials, 2, 10, 1).unwrap());
        assert_ne!(a, target_split(&trials, 2, 10, 2).unwrap());
        assert!(matches!(target_split(&trials, 2, 15, 1), Err(Error::Data(_))));
    }

    #[test]
    fn plan_validation() {
        let trials = tiny_corpus(5, 3);
        let plan = TransferPlan::new([0, 2], 2, TransferMode::PretrainOnly);
        assert!(run_transfer(&trials, &plan, &[0], &TrainConfig::default()).is_err());
        let plan = TransferPlan::new([0, 7], 2, TransferMode::PretrainOnly);
        assert!(run_transfer(&trials, &plan, &[0], &TrainConfig::default()).is_err());
    }

    #[test]
    fn mode_names() {
        for m in TransferMode::ALL {
            assert_eq!(m.name().parse::<TransferMode>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
        }
    }
}
