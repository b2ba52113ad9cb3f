use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::batchnorm::RunningStats;
use crate::{Error, Result};

/// One learnable array with its Adam moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamArray {
    pub name: String,
    pub values: Vec<f64>,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl ParamArray {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        let n = values.len();
        Self {
            name: name.into(),
            values,
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    pub arrays: Vec<ParamArray>,
    /// Batch-norm running statistics.
    pub running: Option<RunningStats>,
}

/// Parameters of every layer plus the shared optimizer step counter.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamStore {
    pub layers: Vec<LayerParams>,
    pub step: u64,
}

/// Gradient arrays in the same nesting as [`ParamStore::layers`].
pub type Gradients = Vec<Vec<Vec<f64>>>;

impl ParamStore {
    /// Number of scalars in layers not listed in `frozen`.
    pub fn count(&self, frozen: &BTreeSet<usize>) -> usize {
        self.layers
            .iter()
            .enumerate()
            .filter(|(i, _)| !frozen.contains(i))
            .flat_map(|(_, l)| &l.arrays)
            .map(|a| a.values.len())
            .sum()
    }

    /// Zeroed gradients shaped like the parameters.
    pub fn zero_grads(&self) -> Gradients {
        self.layers
            .iter()
            .map(|l| l.arrays.iter().map(|a| vec![0.0; a.values.len()]).collect())
            .collect()
    }

    /// Clears the step counter and the moments of every layer not in
    /// `frozen`.
    pub fn reset_optimizer(&mut self, frozen: &BTreeSet<usize>) {
        self.step = 0;
        for a in self
            .layers
            .iter_mut()
            .enumerate()
            .filter(|(i, _)| !frozen.contains(i))
            .flat_map(|(_, l)| l.arrays.iter_mut())
        {
            a.m.iter_mut().for_each(|v| *v = 0.0);
            a.v.iter_mut().for_each(|v| *v = 0.0);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// One bias-corrected Adam update. Layers in `frozen` are skipped entirely:
/// neither their values nor their moments change.
pub fn adam_step(store: &mut ParamStore, grads: &Gradients, cfg: &AdamConfig, frozen: &BTreeSet<usize>) -> Result<()> {
    let mismatch = grads.len() != store.layers.len()
        || store.layers.iter().zip(grads).any(|(l, g)| {
            l.arrays.len() != g.len() || l.arrays.iter().zip(g).any(|(a, ga)| a.values.len() != ga.len())
        });
    if mismatch {
        return Err(Error::Shape("gradients do not match the parameter store".into()));
    }
    store.step += 1;
    let t = store.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for (li, (layer, lg)) in store.layers.iter_mut().zip(grads).enumerate() {
        if frozen.contains(&li) {
            continue;
        }
        for (a, g) in layer.arrays.iter_mut().zip(lg) {
            for j in 0..g.len() {
                a.m[j] = cfg.beta1 * a.m[j] + (1.0 - cfg.beta1) * g[j];
                a.v[j] = cfg.beta2 * a.v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
                let m_hat = a.m[j] / c1;
                let v_hat = a.v[j] / c2;
                a.values[j] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
            }
        }
    }
    Ok(())
}

/// Mini-batch training settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub seed: u64,
    /// Extra layers to hold fixed, on top of those frozen on the model.
    pub frozen_layers: BTreeSet<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        Self {
            batch_size: 50,
            epochs: 15,
            learning_rate: adam.learning_rate,
            adam_beta1: adam.beta1,
            adam_beta2: adam.beta2,
            adam_epsilon: adam.epsilon,
            seed: 0,
            frozen_layers: BTreeSet::new(),
        }
    }
}

impl TrainConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::Config("batch size and epochs must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) || !(self.adam_epsilon > 0.0)
        {
            return Err(Error::Config("Adam betas must lie in [0, 1) and epsilon be positive".into()));
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            epsilon: self.adam_epsilon,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store() -> ParamStore {
        ParamStore {
            layers: vec![
                LayerParams {
                    arrays: vec![ParamArray::new("w", vec![1.0, -2.0, 0.5])],
                    running: None,
                },
                LayerParams {
                    arrays: vec![ParamArray::new("w", vec![3.0]), ParamArray::new("b", vec![0.0])],
                    running: None,
                },
            ],
            step: 0,
        }
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut s = store();
        let g = vec![vec![vec![0.3, -4.0, 0.0]], vec![vec![1e-3], vec![-7.0]]];
        adam_step(&mut s, &g, &AdamConfig::default(), &BTreeSet::new()).unwrap();
        let l0 = &s.layers[0].arrays[0].values;
        assert!((l0[0] - (1.0 - 1e-3)).abs() < 1e-9);
        assert!((l0[1] - (-2.0 + 1e-3)).abs() < 1e-9);
        assert_eq!(l0[2], 0.5);
        assert!((s.layers[1].arrays[1].values[0] - 1e-3).abs() < 1e-9);
    }

    #[test]
    fn zero_gradient_leaves_fresh_parameters() {
        let mut s = store();
        let before = s.clone();
        adam_step(&mut s, &before.zero_grads(), &AdamConfig::default(), &BTreeSet::new()).unwrap();
        assert_eq!(s.layers, before.layers);
    }

    #[test]
    fn frozen_layers_are_untouched() {
        let mut s = store();
        let before = s.clone();
        let g = vec![vec![vec![1.0, 1.0, 1.0]], vec![vec![1.0], vec![1.0]]];
        let frozen: BTreeSet<usize> = [0].into();
        for _ in 0..10 {
            adam_step(&mut s, &g, &AdamConfig::default(), &frozen).unwrap();
        }
        assert_eq!(s.layers[0], before.layers[0]);
        assert_ne!(s.layers[1], before.layers[1]);
        assert_eq!(s.count(&frozen), 2);
        assert_eq!(s.count(&BTreeSet::new()), 5);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = TrainConfig {
            batch_size: 0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainConfig {
            learning_rate: 0.0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
