//! Mini-batch training and batched inference.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ModelState;
use crate::nn::{adam_step, softmax_cross_entropy, Mode, Tensor3, TrainConfig};
use crate::{Error, Result};

/// Indexed supply of labelled `[channels, length]` examples.
pub trait SampleSource: Sync {
    fn len(&self) -> usize;
    fn channels(&self) -> usize;
    fn length(&self) -> usize;
    fn label(&self, i: usize) -> usize;
    /// Writes example `i` channel-major into `out` (`channels * length`).
    fn fill(&self, i: usize, out: &mut [f64]);

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn gather<S: SampleSource + ?Sized>(source: &S, indices: &[usize]) -> Result<Tensor3> {
    let per = source.channels() * source.length();
    let mut values = vec![0.0; indices.len() * per];
    values
        .par_chunks_mut(per)
        .zip(indices.par_iter())
        .for_each(|(out, &i)| source.fill(i, out));
    Tensor3::new([indices.len(), source.channels(), source.length()], values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Sample-weighted mean cross-entropy over the epoch's batches.
    pub mean_loss: f64,
    /// Accuracy of the training-mode predictions made during the epoch.
    pub train_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochStats>,
    /// Wall-clock training time; not part of serialized reports.
    #[serde(skip)]
    pub seconds: f64,
}

fn mix_seed(seed: u64, stream: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03)
}

/// Trains `model` on the examples at `indices`.
///
/// Each run starts from fresh optimizer state. Examples are reshuffled every
/// epoch and the last, possibly short, batch is kept. Layers in
/// `cfg.frozen_layers` are treated as frozen for the duration of the run.
pub fn fit<S: SampleSource + ?Sized>(
    model: &mut ModelState,
    source: &S,
    indices: &[usize],
    cfg: &TrainConfig,
) -> Result<TrainHistory> {
    cfg.validate()?;
    if indices.is_empty() {
        return Err(Error::Argument("no training examples".into()));
    }
    let start = Instant::now();
    let saved_frozen = model.frozen.clone();
    model.frozen.extend(cfg.frozen_layers.iter().copied());
    model.params.reset_optimizer(&model.frozen);

    let mut order_rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, 1));
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, 2));
    let adam = cfg.adam();
    let classes = model.def.classes();
    let mut order = indices.to_vec();
    let mut history = Vec::with_capacity(cfg.epochs);

    let result = (|| -> Result<()> {
        for epoch in 0..cfg.epochs {
            order.shuffle(&mut order_rng);
            let (mut loss_sum, mut correct) = (0.0, 0usize);
            for batch in order.chunks(cfg.batch_size) {
                let x = gather(source, batch)?;
                let labels: Vec<usize> = batch.iter().map(|&i| source.label(i)).collect();
                let trace = model.forward(&x, Mode::Train, &mut dropout_rng)?;
                let (loss, grad) = softmax_cross_entropy(&trace.logits.values, classes, &labels)?;
                for (row, &l) in trace.logits.values.chunks(classes).zip(&labels) {
                    if argmax_row(row) == l {
                        correct += 1;
                    }
                }
                loss_sum += loss * batch.len() as f64;
                let grad = Tensor3::new(trace.logits.dims(), grad)?;
                let grads = model.backward(&trace, &grad)?;
                adam_step(&mut model.params, &grads, &adam, &model.frozen)?;
            }
            history.push(EpochStats {
                epoch: epoch + 1,
                mean_loss: loss_sum / order.len() as f64,
                train_accuracy: correct as f64 / order.len() as f64,
            });
        }
        Ok(())
    })();
    model.frozen = saved_frozen;
    result?;
    model.metadata.train_seed = Some(cfg.seed);
    model.metadata.epochs_completed += cfg.epochs;
    Ok(TrainHistory {
        epochs: history,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax_row(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Class probabilities for the examples at `indices`, row per example.
/// Batches are evaluated independently, so the result does not depend on
/// the thread count.
pub fn predict_proba<S: SampleSource + ?Sized>(
    model: &ModelState,
    source: &S,
    indices: &[usize],
    batch_size: usize,
) -> Result<Vec<f64>> {
    let batches: Vec<Vec<f64>> = indices
        .par_chunks(batch_size.max(1))
        .map(|batch| model.predict(&gather(source, batch)?))
        .collect::<Result<_>>()?;
    Ok(batches.concat())
}
