//! Forward and backward passes of a sequential [`ModelState`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ModelDef, ModelState};
use crate::nn::{
    batchnorm_backward, batchnorm_forward, conv1d_backward, conv1d_forward, dropout, dropout_backward,
    fully_connected, fully_connected_backward, lstm_layer_backward, lstm_layer_forward, maxpool1d,
    maxpool1d_backward, relu, relu_backward, softmax_rows, BatchNormCache, Gradients, LayerDef, LstmCache, Mode,
    RunningStats, Tensor3,
};
use crate::{Error, Result};

/// Per-layer state saved by the forward pass.
#[derive(Debug, Clone)]
pub enum Cache {
    Input(Tensor3),
    BatchNorm(BatchNormCache),
    Pool { argmax: Vec<usize>, dims: [usize; 3] },
    Dropout(Option<Vec<f64>>),
    Lstm { cache: LstmCache, steps: usize, final_only: bool },
    Nothing,
}

/// Result of a training-style forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// Pre-softmax scores, `[batch, classes, 1]`.
    pub logits: Tensor3,
    pub caches: Vec<Cache>,
    /// Output shape of every layer, the final softmax included.
    pub shapes: Vec<[usize; 3]>,
    /// Updated batch-norm statistics by layer index.
    running: Vec<(usize, RunningStats)>,
}

impl ModelState {
    fn prepare_input(&self, x: &Tensor3) -> Result<Tensor3> {
        let want = self.def.input_channels();
        if x.channels() != want {
            return Err(Error::Shape(format!(
                "{} model expects {want} input channels, got {:?}",
                self.def.name(),
                x.dims()
            )));
        }
        match &self.def {
            ModelDef::Lstm(d) if d.temporal_stride > 1 => {
                let [batch, chans, len] = x.dims();
                let steps = len.div_ceil(d.temporal_stride);
                let mut out = Tensor3::zeros([batch, chans, steps]);
                for b in 0..batch {
                    for c in 0..chans {
                        for s in 0..steps {
                            let o = out.index(b, c, s);
                            out.values[o] = x.at(b, c, s * d.temporal_stride);
                        }
                    }
                }
                Ok(out)
            }
            _ => Ok(x.clone()),
        }
    }

    fn layer_mode(&self, i: usize, mode: Mode) -> Mode {
        if self.frozen.contains(&i) {
            Mode::Infer
        } else {
            mode
        }
    }

    fn run<R: Rng + ?Sized>(&self, x: &Tensor3, mode: Mode, rng: &mut R, keep_caches: bool) -> Result<ForwardTrace> {
        let mut h = self.prepare_input(x)?;
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut shapes = Vec::with_capacity(self.layers.len());
        let mut running = Vec::new();
        let mut logits = None;
        for (i, layer) in self.layers.iter().enumerate() {
            let p = &self.params.layers[i].arrays;
            let (out, cache) = match *layer {
                LayerDef::Conv1D { .. } => {
                    let y = conv1d_forward(&h, &p[0].values, &p[1].values, &layer.conv_shape().unwrap())?;
                    (y, Cache::Input(h))
                }
                LayerDef::BatchNorm { .. } => {
                    let mut stats = self.params.layers[i]
                        .running
                        .clone()
                        .ok_or_else(|| Error::Shape(format!("batch-norm layer {i} has no running statistics")))?;
                    let m = self.layer_mode(i, mode);
                    let (y, c) = batchnorm_forward(&h, &p[0].values, &p[1].values, &mut stats, m, &self.batch_norm)?;
                    if m == Mode::Train {
                        running.push((i, stats));
                    }
                    (y, Cache::BatchNorm(c))
                }
                LayerDef::ReLU => (relu(&h), Cache::Input(h)),
                LayerDef::MaxPool1D { window, stride } => {
                    let (y, argmax) = maxpool1d(&h, window, stride)?;
                    let dims = h.dims();
                    (y, Cache::Pool { argmax, dims })
                }
                LayerDef::Dropout { rate } => {
                    let (y, mask) = dropout(&h, rate, self.layer_mode(i, mode), rng)?;
                    (y, Cache::Dropout(mask))
                }
                LayerDef::FullyConnected { inputs, .. } => {
                    if h.channels() * h.length() != inputs {
                        return Err(Error::Shape(format!(
                            "fully connected layer expects {inputs} features, got {:?}",
                            h.dims()
                        )));
                    }
                    let y = fully_connected(&h, &p[0].values, &p[1].values)?;
                    (y, Cache::Input(h))
                }
                LayerDef::Softmax => {
                    let classes = h.channels() * h.length();
                    let probs = softmax_rows(&h.values, classes);
                    let y = Tensor3::new([h.batch(), classes, 1], probs)?;
                    logits = Some(h);
                    (y, Cache::Nothing)
                }
                LayerDef::LSTMLayer { final_state_only, .. } => {
                    let (seq, c) =
                        lstm_layer_forward(&h, &p[0].values, &p[1].values, &p[2].values, &layer.lstm_shape().unwrap())?;
                    let steps = seq.length();
                    let y = if final_state_only {
                        let [batch, hid, _] = seq.dims();
                        let vals = (0..batch * hid).map(|r| seq.values[r * steps + steps - 1]).collect();
                        Tensor3::new([batch, hid, 1], vals)?
                    } else {
                        seq
                    };
                    (
                        y,
                        Cache::Lstm {
                            cache: c,
                            steps,
                            final_only: final_state_only,
                        },
                    )
                }
            };
            shapes.push(out.dims());
            caches.push(if keep_caches { cache } else { Cache::Nothing });
            h = out;
        }
        Ok(ForwardTrace {
            logits: logits.unwrap_or(h),
            caches,
            shapes,
            running,
        })
    }

    /// Forward pass that keeps what backpropagation needs. In train mode the
    /// batch-norm running statistics of trainable layers are updated.
    pub fn forward<R: Rng + ?Sized>(&mut self, x: &Tensor3, mode: Mode, rng: &mut R) -> Result<ForwardTrace> {
        let mut trace = self.run(x, mode, rng, true)?;
        for (i, stats) in std::mem::take(&mut trace.running) {
            self.params.layers[i].running = Some(stats);
        }
        Ok(trace)
    }

    /// Class probabilities, one row of `classes` values per batch item.
    pub fn predict(&self, x: &Tensor3) -> Result<Vec<f64>> {
        let mut no_rng = ChaCha8Rng::seed_from_u64(0);
        let trace = self.run(x, Mode::Infer, &mut no_rng, false)?;
        Ok(softmax_rows(&trace.logits.values, self.def.classes()))
    }

    /// Output shape after each layer for an input of the given dimensions.
    pub fn shape_trace(&self, dims: [usize; 3]) -> Result<Vec<(String, [usize; 3])>> {
        let mut no_rng = ChaCha8Rng::seed_from_u64(0);
        let trace = self.run(&Tensor3::zeros(dims), Mode::Infer, &mut no_rng, false)?;
        Ok(self
            .layers
            .iter()
            .zip(trace.shapes)
            .map(|(l, s)| (l.kind_name().to_string(), s))
            .collect())
    }

    /// Parameter gradients for an upstream gradient on the logits. Frozen
    /// layers get zero gradients, and propagation stops below the lowest
    /// trainable layer.
    pub fn backward(&self, trace: &ForwardTrace, grad_logits: &Tensor3) -> Result<Gradients> {
        let mut grads = self.params.zero_grads();
        let trainable = |i: usize| !self.frozen.contains(&i) && !self.params.layers[i].arrays.is_empty();
        let Some(lowest) = (0..self.layers.len()).find(|&i| trainable(i)) else {
            return Ok(grads);
        };
        let top = match self.layers.last() {
            Some(LayerDef::Softmax) => self.layers.len() - 1,
            _ => self.layers.len(),
        };
        let mut g = grad_logits.clone();
        for i in (lowest..top).rev() {
            let need_input = i > lowest;
            let p = &self.params.layers[i].arrays;
            let layer = &self.layers[i];
            g = match (&trace.caches[i], *layer) {
                (Cache::Input(x), LayerDef::Conv1D { .. }) => {
                    let cg = conv1d_backward(x, &p[0].values, &g, &layer.conv_shape().unwrap(), need_input)?;
                    if trainable(i) {
                        grads[i] = vec![cg.grad_w, cg.grad_b];
                    }
                    match cg.grad_x {
                        Some(gx) => gx,
                        None => break,
                    }
                }
                (Cache::BatchNorm(c), LayerDef::BatchNorm { .. }) => {
                    let (gx, gs, gb) = batchnorm_backward(c, &g, &p[0].values)?;
                    if trainable(i) {
                        grads[i] = vec![gs, gb];
                    }
                    gx
                }
                (Cache::Input(x), LayerDef::ReLU) => relu_backward(x, &g)?,
                (Cache::Pool { argmax, dims }, LayerDef::MaxPool1D { .. }) => maxpool1d_backward(&g, argmax, *dims)?,
                (Cache::Dropout(mask), LayerDef::Dropout { .. }) => dropout_backward(&g, mask.as_deref())?,
                (Cache::Input(x), LayerDef::FullyConnected { .. }) => {
                    let (gx, gw, gb) = fully_connected_backward(x, &p[0].values, &g)?;
                    if trainable(i) {
                        grads[i] = vec![gw, gb];
                    }
                    gx.reshape(x.dims())?
                }
                (
                    Cache::Lstm {
                        cache,
                        steps,
                        final_only,
                    },
                    LayerDef::LSTMLayer { .. },
                ) => {
                    let shape = layer.lstm_shape().unwrap();
                    let up = if *final_only {
                        let [batch, hid, _] = g.dims();
                        let mut full = Tensor3::zeros([batch, hid, *steps]);
                        for r in 0..batch * hid {
                            full.values[r * steps + steps - 1] = g.values[r];
                        }
                        full
                    } else {
                        g
                    };
                    let lg = lstm_layer_backward(cache, &up, &p[0].values, &p[1].values, &shape, need_input)?;
                    if trainable(i) {
                        grads[i] = vec![lg.grad_w_ih, lg.grad_w_hh, lg.grad_b];
                    }
                    match lg.grad_x {
                        Some(gx) => gx,
                        None => break,
                    }
                }
                _ => {
                    return Err(Error::Shape(format!(
                        "layer {i} ({}) has no cached activations for backward",
                        layer.kind_name()
                    )))
                }
            };
        }
        Ok(grads)
    }
}
