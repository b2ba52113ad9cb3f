use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, Metrics};
use super::source::TrialSource;
use crate::dataset::{split_indices, Label, ModalitySelection, SplitSpec, Trial, N_CLASSES};
use crate::models::{build_cnn, build_lstm, fit, predict_proba, CnnDef, LstmDef, ModelDef, ModelState, SampleSource, TrainHistory};
use crate::nn::TrainConfig;
use crate::{Error, Result};

/// Architecture choice for the studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Cnn,
    Lstm,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Cnn => "cnn",
            ModelKind::Lstm => "lstm",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cnn" => Ok(ModelKind::Cnn),
            "lstm" => Ok(ModelKind::Lstm),
            other => Err(Error::Argument(format!("unknown model {other:?} (expected cnn or lstm)"))),
        }
    }
}

/// Model family plus the knobs that are not fixed by the architecture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelChoice {
    pub kind: ModelKind,
    /// Input time-step stride for the LSTM.
    pub lstm_stride: usize,
}

impl ModelChoice {
    pub fn cnn() -> Self {
        Self {
            kind: ModelKind::Cnn,
            lstm_stride: 1,
        }
    }

    pub fn lstm(stride: usize) -> Self {
        Self {
            kind: ModelKind::Lstm,
            lstm_stride: stride,
        }
    }

    /// Definition sized for the channels of `modality`.
    pub fn def_for(&self, modality: ModalitySelection) -> ModelDef {
        let channels = modality.channels().len();
        match self.kind {
            ModelKind::Cnn => ModelDef::Cnn(CnnDef::new(channels)),
            ModelKind::Lstm => {
                let mut d = LstmDef::new(channels);
                d.temporal_stride = self.lstm_stride;
                ModelDef::Lstm(d)
            }
        }
    }
}

pub fn build_model(def: &ModelDef, seed: u64) -> Result<ModelState> {
    match def {
        ModelDef::Cnn(d) => build_cnn(d, seed),
        ModelDef::Lstm(d) => build_lstm(d, seed),
    }
}

/// A trained model with its split and test-set scores.
#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    pub model: ModelState,
    pub metrics: Metrics,
    pub history: TrainHistory,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Most probable class per row.
pub fn predict_classes<S: SampleSource + ?Sized>(model: &ModelState, source: &S, indices: &[usize]) -> Result<Vec<usize>> {
    let classes = model.def.classes();
    let probs = predict_proba(model, source, indices, 50)?;
    Ok(probs.chunks(classes).map(crate::models::argmax_row).collect())
}

/// Scores `model` on `indices`, reading inputs through `source`.
pub fn evaluate<S: SampleSource + ?Sized>(model: &ModelState, source: &S, indices: &[usize]) -> Result<Metrics> {
    let preds = predict_classes(model, source, indices)?;
    let labels: Vec<usize> = indices.iter().map(|&i| source.label(i)).collect();
    compute_metrics(&preds, &labels)
}

pub(crate) fn check_classes(trials: &[Trial], indices: &[usize], what: &str) -> Result<()> {
    let mut seen = [false; N_CLASSES];
    for &i in indices {
        seen[trials[i].label.index()] = true;
    }
    match seen.iter().position(|s| !s) {
        Some(c) => Err(Error::Data(format!("{what} has no trials of class {}", Label::ALL[c]))),
        None => Ok(()),
    }
}

/// Stratified 80/20 split seeded by `cfg.seed`, then training and
/// inference-mode evaluation on the held-out part. The same seed also
/// drives weight initialization, shuffling and dropout.
pub fn run_training(
    trials: &[Trial],
    model_def: &ModelDef,
    modality: ModalitySelection,
    cfg: &TrainConfig,
) -> Result<TrainingOutcome> {
    let all: Vec<usize> = (0..trials.len()).collect();
    if trials.is_empty() {
        return Err(Error::Data("no trials to train on".into()));
    }
    check_classes(trials, &all, "the dataset")?;
    let labels: Vec<Label> = trials.iter().map(|t| t.label).collect();
    let (train, test) = split_indices(&labels, &SplitSpec::with_seed(cfg.seed))?;
    check_classes(trials, &train, "the training split")?;
    run_training_on(trials, model_def, modality, cfg, train, test)
}

/// Training and evaluation on a given partition.
pub fn run_training_on(
    trials: &[Trial],
    model_def: &ModelDef,
    modality: ModalitySelection,
    cfg: &TrainConfig,
    train: Vec<usize>,
    test: Vec<usize>,
) -> Result<TrainingOutcome> {
    if model_def.input_channels() != modality.channels().len() {
        return Err(Error::Config(format!(
            "model takes {} channels but modality {modality} has {}",
            model_def.input_channels(),
            modality.channels().len()
        )));
    }
    let source = TrialSource::new(trials, modality);
    let mut model = build_model(model_def, cfg.seed)?;
    let history = fit(&mut model, &source, &train, cfg)?;
    let metrics = evaluate(&model, &source, &test)?;
    Ok(TrainingOutcome {
        model,
        metrics,
        history,
        train_indices: train,
        test_indices: test,
    })
}
