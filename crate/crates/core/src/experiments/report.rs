use serde::{Deserialize, Serialize};

use super::metrics::{aggregate_seeds, mean_and_sample_std, ClassMetrics, Metrics};
use super::transfer::TransferMode;
use crate::dataset::ModalitySelection;
use crate::{Error, Result};

/// What distinguishes one experimental condition from another.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modality: Option<ModalitySelection>,
    /// Disabled sensors, `"none"` for the intact set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mask: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transfer_mode: Option<TransferMode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub metrics: Metrics,
    pub test_size: usize,
    /// Mean training loss per epoch, empty when nothing was trained.
    #[serde(default)]
    pub epoch_losses: Vec<f64>,
}

/// Per-seed results of one condition and their summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub study: String,
    pub condition: Condition,
    pub seeds: Vec<u64>,
    pub per_seed: Vec<SeedResult>,
    pub mean_accuracy: f64,
    /// Sample standard deviation; absent with a single seed.
    pub std_accuracy: Option<f64>,
    pub per_class_mean: Vec<ClassMetrics>,
}

impl ExperimentReport {
    pub fn new(study: &str, condition: Condition, per_seed: Vec<SeedResult>) -> Result<Self> {
        let metrics: Vec<Metrics> = per_seed.iter().map(|r| r.metrics.clone()).collect();
        let (mean, std, per_class_mean) = if metrics.len() >= 2 {
            let agg = aggregate_seeds(&metrics)?;
            (agg.mean_accuracy, Some(agg.std_accuracy), agg.per_class_mean)
        } else {
            let acc: Vec<f64> = metrics.iter().map(|m| m.accuracy).collect();
            let per_class = metrics.first().map(|m| m.per_class.clone()).unwrap_or_default();
            (mean_and_sample_std(&acc).0, None, per_class)
        };
        Ok(Self {
            study: study.to_string(),
            condition,
            seeds: per_seed.iter().map(|r| r.seed).collect(),
            per_seed,
            mean_accuracy: mean,
            std_accuracy: std,
            per_class_mean,
        })
    }

    /// Checks every seed's metrics for internal consistency: the confusion
    /// matrix counts the whole test set and its trace reproduces the stored
    /// accuracy, and the summary mean matches the per-seed values.
    pub fn validate(&self) -> Result<()> {
        if self.per_seed.is_empty() {
            return Err(Error::Data(format!("{} report has no seeds", self.study)));
        }
        for r in &self.per_seed {
            let m = &r.metrics;
            let total: u64 = m.confusion.iter().flatten().sum();
            if total != r.test_size as u64 {
                return Err(Error::Data(format!(
                    "seed {}: confusion matrix counts {total} samples, test set has {}",
                    r.seed, r.test_size
                )));
            }
            let trace: u64 = (0..m.confusion.len()).map(|c| m.confusion[c][c]).sum();
            if trace as f64 / total as f64 != m.accuracy {
                return Err(Error::Data(format!(
                    "seed {}: accuracy {} disagrees with the confusion matrix",
                    r.seed, m.accuracy
                )));
            }
        }
        let (mean, _) = mean_and_sample_std(&self.accuracies());
        if (mean - self.mean_accuracy).abs() > 1e-12 {
            return Err(Error::Data(format!("{} report mean accuracy is stale", self.study)));
        }
        Ok(())
    }

    pub fn accuracies(&self) -> Vec<f64> {
        self.per_seed.iter().map(|r| r.metrics.accuracy).collect()
    }

    /// One-line human summary, e.g. `cnn all: 0.9650 +- 0.0080 (5 seeds)`.
    pub fn summary(&self) -> String {
        let c = &self.condition;
        let mut parts = Vec::new();
        if let Some(m) = &c.model {
            parts.push(m.clone());
        }
        if let Some(m) = c.modality {
            parts.push(m.to_string());
        }
        if let Some(t) = c.transfer_mode {
            parts.push(t.to_string());
        }
        if let Some(m) = &c.mask {
            parts.push(format!("mask={m}"));
        }
        let std = self.std_accuracy.map(|s| format!(" +- {s:.4}")).unwrap_or_default();
        format!(
            "{} {}: {:.4}{std} ({} seed{})",
            self.study,
            parts.join(" "),
            self.mean_accuracy,
            self.seeds.len(),
            if self.seeds.len() == 1 { "" } else { "s" }
        )
    }
}
