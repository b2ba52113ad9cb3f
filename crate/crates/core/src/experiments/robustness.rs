use rayon::prelude::*;

use super::report::{Condition, ExperimentReport, SeedResult};
use super::source::TrialSource;
use super::training::{evaluate, run_training, ModelChoice, TrainingOutcome};
use crate::dataset::{ModalitySelection, SensorMask, SensorUnit, Trial};
use crate::models::ModelState;
use crate::nn::TrainConfig;
use crate::Result;

/// A model trained on unmasked data, with the test indices of its split.
#[derive(Debug, Clone)]
pub struct TrainedRun {
    pub seed: u64,
    pub model: ModelState,
    pub modality: ModalitySelection,
    pub test_indices: Vec<usize>,
}

impl TrainedRun {
    pub fn from_outcome(seed: u64, modality: ModalitySelection, outcome: &TrainingOutcome) -> Self {
        Self {
            seed,
            model: outcome.model.clone(),
            modality,
            test_indices: outcome.test_indices.clone(),
        }
    }
}

/// The intact set followed by each sensor switched off on its own.
pub fn single_sensor_conditions() -> Vec<SensorMask> {
    std::iter::once(SensorMask::none())
        .chain(SensorUnit::ALL.into_iter().map(SensorMask::single))
        .collect()
}

/// Evaluates each trained run with the test inputs masked per condition.
/// Training data is never masked.
pub fn run_robustness(trials: &[Trial], runs: &[TrainedRun], conditions: &[SensorMask]) -> Result<Vec<ExperimentReport>> {
    conditions
        .iter()
        .map(|mask| {
            let per_seed = runs
                .par_iter()
                .map(|run| {
                    let source = TrialSource::new(trials, run.modality).masked(mask);
                    Ok(SeedResult {
                        seed: run.seed,
                        metrics: evaluate(&run.model, &source, &run.test_indices)?,
                        test_size: run.test_indices.len(),
                        epoch_losses: Vec::new(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            ExperimentReport::new(
                "robustness",
                Condition {
                    model: runs.first().map(|r| r.model.def.name().to_string()),
                    modality: runs.first().map(|r| r.modality),
                    mask: Some(mask.describe()),
                    ..Condition::default()
                },
                per_seed,
            )
        })
        .collect()
}

/// Trains the all-channel CNN per seed, then evaluates every condition.
pub fn run_robustness_study(
    trials: &[Trial],
    seeds: &[u64],
    cfg: &TrainConfig,
    conditions: &[SensorMask],
) -> Result<Vec<ExperimentReport>> {
    let modality = ModalitySelection::All;
    let def = ModelChoice::cnn().def_for(modality);
    let runs = seeds
        .par_iter()
        .map(|&seed| {
            let c = TrainConfig {
                seed,
                ..cfg.clone()
            };
            let out = run_training(trials, &def, modality, &c)?;
            Ok(TrainedRun::from_outcome(seed, modality, &out))
        })
        .collect::<Result<Vec<_>>>()?;
    run_robustness(trials, &runs, conditions)
}
