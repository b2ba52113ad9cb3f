use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::metrics::compute_metrics;
use super::report::{Condition, ExperimentReport, SeedResult};
use super::training::{run_training, ModelChoice};
use crate::dataset::{split_indices, Label, ModalitySelection, SplitSpec, Trial, N_CLASSES};
use crate::nn::TrainConfig;
use crate::Result;

#[derive(Debug, Clone)]
pub struct AblationOptions {
    pub models: Vec<ModelChoice>,
    pub modalities: Vec<ModalitySelection>,
    /// Training settings; the seed is replaced per run.
    pub train: TrainConfig,
}

impl Default for AblationOptions {
    fn default() -> Self {
        Self {
            models: vec![ModelChoice::cnn(), ModelChoice::lstm(1)],
            modalities: ModalitySelection::ALL.to_vec(),
            train: TrainConfig::default(),
        }
    }
}

/// Accuracy of guessing a class uniformly at random for each test trial of
/// every seed's standard split.
pub fn random_baseline(trials: &[Trial], seeds: &[u64]) -> Result<ExperimentReport> {
    let labels: Vec<Label> = trials.iter().map(|t| t.label).collect();
    let per_seed = seeds
        .iter()
        .map(|&seed| {
            let (_, test) = split_indices(&labels, &SplitSpec::with_seed(seed))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xBA5E_11E0);
            let truth: Vec<usize> = test.iter().map(|&i| labels[i].index()).collect();
            let guesses: Vec<usize> = test.iter().map(|_| rng.random_range(0..N_CLASSES)).collect();
            Ok(SeedResult {
                seed,
                metrics: compute_metrics(&guesses, &truth)?,
                test_size: test.len(),
                epoch_losses: Vec::new(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ExperimentReport::new(
        "ablation",
        Condition {
            model: Some("random".into()),
            ..Condition::default()
        },
        per_seed,
    )
}

/// Trains every (model, modality) pair for every seed; the random-guess
/// baseline report comes last.
pub fn run_modality_ablation(trials: &[Trial], seeds: &[u64], opts: &AblationOptions) -> Result<Vec<ExperimentReport>> {
    let mut reports = Vec::new();
    for choice in &opts.models {
        for &modality in &opts.modalities {
            let def = choice.def_for(modality);
            let per_seed = seeds
                .par_iter()
                .map(|&seed| {
                    let cfg = TrainConfig {
                        seed,
                        ..opts.train.clone()
                    };
                    let out = run_training(trials, &def, modality, &cfg)?;
                    Ok(SeedResult {
                        seed,
                        test_size: out.test_indices.len(),
                        epoch_losses: out.history.epochs.iter().map(|e| e.mean_loss).collect(),
                        metrics: out.metrics,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            reports.push(ExperimentReport::new(
                "ablation",
                Condition {
                    model: Some(choice.kind.name().into()),
                    modality: Some(modality),
                    ..Condition::default()
                },
                per_seed,
            )?);
        }
    }
    reports.push(random_baseline(trials, seeds)?);
    Ok(reports)
}
