//! The two classifier architectures, parameter accounting, feature-layer
//! freezing, training loop and checkpoints.

mod checkpoint;
mod network;
mod train;

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{N_CLASSES, N_SAMPLES};
use crate::nn::{BatchNormConfig, LayerDef, LayerParams, ParamArray, ParamStore, RunningStats};
use crate::{Error, Result};

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use network::{Cache, ForwardTrace};
pub use train::{argmax_row, fit, predict_proba, EpochStats, SampleSource, TrainHistory};

/// Convolutional classifier: four conv blocks, then dropout and a dense
/// output layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnnDef {
    pub input_channels: usize,
    pub input_length: usize,
    pub conv_channels: Vec<usize>,
    pub kernel: usize,
    /// `(window, stride)` after each of the first three conv blocks.
    pub pools: Vec<(usize, usize)>,
    pub dropout: f64,
    pub classes: usize,
}

impl CnnDef {
    pub fn new(input_channels: usize) -> Self {
        Self {
            input_channels,
            input_length: N_SAMPLES,
            conv_channels: vec![10, 20, 30, 40],
            kernel: 9,
            pools: vec![(50, 50), (10, 10), (10, 10)],
            dropout: 0.2,
            classes: N_CLASSES,
        }
    }

    /// Layer sequence, checking that the shapes chain.
    pub fn layers(&self) -> Result<Vec<LayerDef>> {
        let bad = |msg: String| Error::Config(format!("CNN definition: {msg}"));
        if self.conv_channels.is_empty() || self.pools.len() + 1 != self.conv_channels.len() {
            return Err(bad(format!(
                "{} conv blocks need {} pools, got {}",
                self.conv_channels.len(),
                self.conv_channels.len().saturating_sub(1),
                self.pools.len()
            )));
        }
        if self.kernel % 2 == 0 {
            return Err(bad(format!("kernel {} must be odd for length-preserving padding", self.kernel)));
        }
        let mut layers = Vec::new();
        let mut chans = self.input_channels;
        let mut len = self.input_length;
        for (i, &out) in self.conv_channels.iter().enumerate() {
            layers.push(LayerDef::Conv1D {
                in_channels: chans,
                out_channels: out,
                kernel: self.kernel,
                padding: (self.kernel - 1) / 2,
            });
            layers.push(LayerDef::BatchNorm { channels: out });
            chans = out;
            if let Some(&(window, stride)) = self.pools.get(i) {
                layers.push(LayerDef::ReLU);
                if window > len {
                    return Err(bad(format!("pool window {window} exceeds length {len}")));
                }
                layers.push(LayerDef::MaxPool1D { window, stride });
                len = (len - window) / stride + 1;
            }
        }
        layers.push(LayerDef::Dropout { rate: self.dropout });
        layers.push(LayerDef::FullyConnected {
            inputs: chans * len,
            outputs: self.classes,
        });
        layers.push(LayerDef::Softmax);
        for l in &layers {
            l.validate()?;
        }
        Ok(layers)
    }
}

/// Recurrent classifier reading the final hidden state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmDef {
    pub input_size: usize,
    pub layers: usize,
    pub hidden: usize,
    pub dropout: f64,
    pub classes: usize,
    /// Keep every `temporal_stride`-th time step of the input; 1 uses the
    /// full sequence.
    pub temporal_stride: usize,
}

impl LstmDef {
    pub fn new(input_size: usize) -> Self {
        Self {
            input_size,
            layers: 2,
            hidden: 100,
            dropout: 0.2,
            classes: N_CLASSES,
            temporal_stride: 1,
        }
    }

    pub fn layer_defs(&self) -> Result<Vec<LayerDef>> {
        if self.layers == 0 || self.temporal_stride == 0 {
            return Err(Error::Config("LSTM definition needs at least one layer and a stride of at least 1".into()));
        }
        let mut layers: Vec<LayerDef> = (0..self.layers)
            .map(|i| LayerDef::LSTMLayer {
                input_size: if i == 0 { self.input_size } else { self.hidden },
                hidden_size: self.hidden,
                final_state_only: i + 1 == self.layers,
            })
            .collect();
        layers.push(LayerDef::Dropout { rate: self.dropout });
        layers.push(LayerDef::FullyConnected {
            inputs: self.hidden,
            outputs: self.classes,
        });
        layers.push(LayerDef::Softmax);
        for l in &layers {
            l.validate()?;
        }
        Ok(layers)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "architecture", rename_all = "lowercase")]
pub enum ModelDef {
    Cnn(CnnDef),
    Lstm(LstmDef),
}

impl ModelDef {
    pub fn layers(&self) -> Result<Vec<LayerDef>> {
        match self {
            ModelDef::Cnn(d) => d.layers(),
            ModelDef::Lstm(d) => d.layer_defs(),
        }
    }

    pub fn input_channels(&self) -> usize {
        match self {
            ModelDef::Cnn(d) => d.input_channels,
            ModelDef::Lstm(d) => d.input_size,
        }
    }

    pub fn classes(&self) -> usize {
        match self {
            ModelDef::Cnn(d) => d.classes,
            ModelDef::Lstm(d) => d.classes,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelDef::Cnn(_) => "cnn",
            ModelDef::Lstm(_) => "lstm",
        }
    }
}

/// Provenance carried with a model and its checkpoints.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub init_seed: u64,
    pub train_seed: Option<u64>,
    pub epochs_completed: usize,
}

/// A built network: definition, layer sequence, parameters and the set of
/// frozen layer indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelState {
    pub def: ModelDef,
    pub layers: Vec<LayerDef>,
    pub params: ParamStore,
    pub frozen: BTreeSet<usize>,
    pub batch_norm: BatchNormConfig,
    pub metadata: TrainingMetadata,
}

fn init_params(layers: &[LayerDef], rng: &mut ChaCha8Rng) -> ParamStore {
    let mut uniform = |n: usize, bound: f64| -> Vec<f64> { (0..n).map(|_| rng.random_range(-bound..bound)).collect() };
    let layers = layers
        .iter()
        .map(|l| match *l {
            LayerDef::Conv1D {
                in_channels, kernel, ..
            } => {
                let bound = (1.0 / (in_channels * kernel) as f64).sqrt();
                LayerParams {
                    arrays: l.param_shapes().into_iter().map(|(name, n)| ParamArray::new(name, uniform(n, bound))).collect(),
                    running: None,
                }
            }
            LayerDef::FullyConnected { inputs, .. } => {
                let bound = (1.0 / inputs as f64).sqrt();
                LayerParams {
                    arrays: l.param_shapes().into_iter().map(|(name, n)| ParamArray::new(name, uniform(n, bound))).collect(),
                    running: None,
                }
            }
            LayerDef::LSTMLayer { hidden_size, .. } => {
                let bound = (1.0 / hidden_size as f64).sqrt();
                LayerParams {
                    arrays: l.param_shapes().into_iter().map(|(name, n)| ParamArray::new(name, uniform(n, bound))).collect(),
                    running: None,
                }
            }
            LayerDef::BatchNorm { channels } => LayerParams {
                arrays: vec![
                    ParamArray::new("scale", vec![1.0; channels]),
                    ParamArray::new("shift", vec![0.0; channels]),
                ],
                running: Some(RunningStats::new(channels)),
            },
            _ => LayerParams::default(),
        })
        .collect();
    ParamStore { layers, step: 0 }
}

fn build(def: ModelDef, seed: u64) -> Result<ModelState> {
    let layers = def.layers()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = init_params(&layers, &mut rng);
    Ok(ModelState {
        def,
        layers,
        params,
        frozen: BTreeSet::new(),
        batch_norm: BatchNormConfig::default(),
        metadata: TrainingMetadata {
            init_seed: seed,
            ..TrainingMetadata::default()
        },
    })
}

/// Builds the CNN with weights drawn uniformly in `+-sqrt(1 / fan_in)`.
pub fn build_cnn(def: &CnnDef, seed: u64) -> Result<ModelState> {
    build(ModelDef::Cnn(def.clone()), seed)
}

pub fn build_lstm(def: &LstmDef, seed: u64) -> Result<ModelState> {
    build(ModelDef::Lstm(def.clone()), seed)
}

/// Total parameters, or only those outside frozen layers.
pub fn count_parameters(model: &ModelState, trainable_only: bool) -> usize {
    if trainable_only {
        model.params.count(&model.frozen)
    } else {
        model.params.count(&BTreeSet::new())
    }
}

/// Marks every convolution and batch-norm layer frozen. Frozen batch-norm
/// layers run on their running statistics and stop updating them.
pub fn freeze_feature_layers(model: &mut ModelState) -> Result<()> {
    if !matches!(model.def, ModelDef::Cnn(_)) {
        return Err(Error::Unsupported(
            "feature-layer freezing is defined for the CNN only".into(),
        ));
    }
    model.frozen = model
        .layers
        .iter()
        .enumerate()
        .filter(|(_, l)| l.is_feature_layer())
        .map(|(i, _)| i)
        .collect();
    Ok(())
}

pub fn unfreeze(model: &mut ModelState) {
    model.frozen.clear();
}
