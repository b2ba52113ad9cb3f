use serde::{Deserialize, Serialize};

use super::conv::Conv1dShape;
use super::lstm::LstmShape;
use crate::{Error, Result};

/// One entry of a sequential network definition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum LayerDef {
    Conv1D {
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        padding: usize,
    },
    BatchNorm {
        channels: usize,
    },
    ReLU,
    MaxPool1D {
        window: usize,
        stride: usize,
    },
    Dropout {
        rate: f64,
    },
    /// Consumes each item's flattened features.
    FullyConnected {
        inputs: usize,
        outputs: usize,
    },
    Softmax,
    /// Emits the whole hidden sequence, or only the last step as a
    /// `[batch, hidden, 1]` tensor when `final_state_only` is set.
    LSTMLayer {
        input_size: usize,
        hidden_size: usize,
        final_state_only: bool,
    },
}

impl LayerDef {
    pub fn kind_name(&self) -> &'static str {
        match self {
            LayerDef::Conv1D { .. } => "Conv1D",
            LayerDef::BatchNorm { .. } => "BatchNorm",
            LayerDef::ReLU => "ReLU",
            LayerDef::MaxPool1D { .. } => "MaxPool1D",
            LayerDef::Dropout { .. } => "Dropout",
            LayerDef::FullyConnected { .. } => "FullyConnected",
            LayerDef::Softmax => "Softmax",
            LayerDef::LSTMLayer { .. } => "LSTMLayer",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            LayerDef::Conv1D {
                in_channels,
                out_channels,
                kernel,
                ..
            } => in_channels > 0 && out_channels > 0 && kernel > 0,
            LayerDef::BatchNorm { channels } => channels > 0,
            LayerDef::MaxPool1D { window, stride } => window > 0 && stride > 0,
            LayerDef::Dropout { rate } => (0.0..1.0).contains(&rate),
            LayerDef::FullyConnected { inputs, outputs } => inputs > 0 && outputs > 0,
            LayerDef::LSTMLayer {
                input_size,
                hidden_size,
                ..
            } => input_size > 0 && hidden_size > 0,
            LayerDef::ReLU | LayerDef::Softmax => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid hyperparameters in {self:?}")))
        }
    }

    pub fn conv_shape(&self) -> Option<Conv1dShape> {
        match *self {
            LayerDef::Conv1D {
                in_channels,
                out_channels,
                kernel,
                padding,
            } => Some(Conv1dShape {
                in_channels,
                out_channels,
                kernel,
                padding,
            }),
            _ => None,
        }
    }

    pub fn lstm_shape(&self) -> Option<LstmShape> {
        match *self {
            LayerDef::LSTMLayer {
                input_size,
                hidden_size,
                ..
            } => Some(LstmShape {
                input_size,
                hidden_size,
            }),
            _ => None,
        }
    }

    /// Names and sizes of the learnable arrays, in storage order.
    pub fn param_shapes(&self) -> Vec<(&'static str, usize)> {
        match *self {
            LayerDef::Conv1D { out_channels, .. } => {
                let s = self.conv_shape().unwrap();
                vec![("weight", s.weight_len()), ("bias", out_channels)]
            }
            LayerDef::BatchNorm { channels } => vec![("scale", channels), ("shift", channels)],
            LayerDef::FullyConnected { inputs, outputs } => vec![("weight", inputs * outputs), ("bias", outputs)],
            LayerDef::LSTMLayer { hidden_size, .. } => {
                let s = self.lstm_shape().unwrap();
                vec![("w_ih", s.w_ih_len()), ("w_hh", s.w_hh_len()), ("bias", 4 * hidden_size)]
            }
            LayerDef::ReLU | LayerDef::MaxPool1D { .. } | LayerDef::Dropout { .. } | LayerDef::Softmax => vec![],
        }
    }

    pub fn param_count(&self) -> usize {
        self.param_shapes().iter().map(|(_, n)| n).sum()
    }

    /// Convolution and batch-norm layers form the feature extractor.
    pub fn is_feature_layer(&self) -> bool {
        matches!(self, LayerDef::Conv1D { .. } | LayerDef::BatchNorm { .. })
    }
}
