//! Dense 64-bit neural network primitives: forward and backward passes for
//! the fixed layer set, and the Adam optimizer.

pub mod activation;
pub mod adam;
pub mod batchnorm;
pub mod conv;
pub mod dense;
pub mod dropout;
mod gemm;
pub mod layer;
pub mod lstm;
pub mod pool;
pub mod tensor;

pub use activation::{relu, relu_backward, softmax_cross_entropy, softmax_rows};
pub use adam::{adam_step, AdamConfig, Gradients, LayerParams, ParamArray, ParamStore, TrainConfig};
pub use batchnorm::{batchnorm_backward, batchnorm_forward, BatchNormCache, BatchNormConfig, RunningStats};
pub use conv::{conv1d_backward, conv1d_forward, Conv1dShape, ConvGrads};
pub use dense::{fully_connected, fully_connected_backward};
pub use dropout::{dropout, dropout_backward};
pub use layer::LayerDef;
pub use lstm::{lstm_layer_backward, lstm_layer_forward, LstmCache, LstmGrads, LstmShape};
pub use pool::{maxpool1d, maxpool1d_backward};
pub use tensor::{Mode, Tensor3};
