use serde::{Deserialize, Serialize};

use crate::dataset::N_CLASSES;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Classification quality on one evaluation set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<u64>>,
}

/// Harmonic mean of precision and recall, 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Metrics for the five motion classes.
pub fn compute_metrics(predictions: &[usize], labels: &[usize]) -> Result<Metrics> {
    compute_metrics_for(predictions, labels, N_CLASSES)
}

/// Accuracy, per-class precision/recall/F1 and the confusion matrix.
/// Precision (recall) of a class that is never predicted (never present)
/// is reported as 0.
pub fn compute_metrics_for(predictions: &[usize], labels: &[usize], classes: usize) -> Result<Metrics> {
    if predictions.is_empty() {
        return Err(Error::Argument("cannot score an empty prediction set".into()));
    }
    if predictions.len() != labels.len() {
        return Err(Error::Argument(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if let Some(&bad) = predictions.iter().chain(labels).find(|&&c| c >= classes) {
        return Err(Error::Argument(format!("class {bad} outside 0..{classes}")));
    }
    let mut confusion = vec![vec![0u64; classes]; classes];
    let mut correct = 0u64;
    for (&p, &l) in predictions.iter().zip(labels) {
        confusion[l][p] += 1;
        if p == l {
            correct += 1;
        }
    }
    let per_class = (0..classes)
        .map(|c| {
            let tp = confusion[c][c] as f64;
            let predicted: u64 = (0..classes).map(|r| confusion[r][c]).sum();
            let actual: u64 = confusion[c].iter().sum();
            let precision = if predicted == 0 { 0.0 } else { tp / predicted as f64 };
            let recall = if actual == 0 { 0.0 } else { tp / actual as f64 };
            ClassMetrics {
                precision,
                recall,
                f1: f1_score(precision, recall),
            }
        })
        .collect();
    Ok(Metrics {
        accuracy: correct as f64 / predictions.len() as f64,
        per_class,
        confusion,
    })
}

/// Mean and sample standard deviation across seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedAggregate {
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    /// Elementwise mean of the per-class metrics.
    pub per_class_mean: Vec<ClassMetrics>,
}

pub fn aggregate_seeds(per_seed: &[Metrics]) -> Result<SeedAggregate> {
    if per_seed.len() < 2 {
        return Err(Error::Argument(format!(
            "aggregation needs at least 2 seeds, got {}",
            per_seed.len()
        )));
    }
    let acc: Vec<f64> = per_seed.iter().map(|m| m.accuracy).collect();
    let (mean, std) = mean_and_sample_std(&acc);
    let classes = per_seed[0].per_class.len();
    if per_seed.iter().any(|m| m.per_class.len() != classes) {
        return Err(Error::Argument("seeds disagree on the number of classes".into()));
    }
    let n = per_seed.len() as f64;
    let per_class_mean = (0..classes)
        .map(|c| ClassMetrics {
            precision: per_seed.iter().map(|m| m.per_class[c].precision).sum::<f64>() / n,
            recall: per_seed.iter().map(|m| m.per_class[c].recall).sum::<f64>() / n,
            f1: per_seed.iter().map(|m| m.per_class[c].f1).sum::<f64>() / n,
        })
        .collect();
    Ok(SeedAggregate {
        mean_accuracy: mean,
        std_accuracy: std,
        per_class_mean,
    })
}

pub(crate) fn mean_and_sample_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std = if v.len() < 2 {
        0.0
    } else {
        (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    (mean, std)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_predictions() {
        let labels: Vec<usize> = (0..25).map(|i| i % 5).collect();
        let m = compute_metrics(&labels, &labels).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert!(m.per_class.iter().all(|c| c.precision == 1.0 && c.recall == 1.0 && c.f1 == 1.0));
    }

    #[test]
    fn two_class_reduction() {
        // confusion [[8, 2], [3, 7]]
        let mut labels = vec![0; 10];
        labels.extend(vec![1; 10]);
        let mut preds = vec![0; 8];
        preds.extend(vec![1; 2]);
        preds.extend(vec![0; 3]);
        preds.extend(vec![1; 7]);
        let m = compute_metrics_for(&preds, &labels, 2).unwrap();
        assert_eq!(m.confusion, vec![vec![8, 2], vec![3, 7]]);
        let (p, r) = (8.0 / 11.0, 8.0 / 10.0);
        assert_eq!(m.per_class[0].precision, p);
        assert_eq!(m.per_class[0].recall, r);
        assert!((m.per_class[0].f1 - 2.0 * p * r / (p + r)).abs() < 1e-15);
        assert!((m.per_class[0].f1 - 0.7619).abs() < 5e-5);
    }

    #[test]
    fn f1_fixture_and_degenerate() {
        assert!((f1_score(0.9757, 0.9331) - 0.9539).abs() < 5e-4);
        assert_eq!(f1_score(0.0, 0.0), 0.0);
    }

    #[test]
    fn argument_errors() {
        assert!(compute_metrics(&[], &[]).is_err());
        assert!(compute_metrics(&[0], &[0, 1]).is_err());
        assert!(compute_metrics(&[5], &[0]).is_err());
    }

    #[test]
    fn aggregation() {
        let with_acc = |a: f64| Metrics {
            accuracy: a,
            per_class: vec![
                ClassMetrics {
                    precision: a,
                    recall: 1.0,
                    f1: 0.5
                };
                5
            ],
            confusion: vec![],
        };
        let agg = aggregate_seeds(&[0.9; 5].map(with_acc)).unwrap();
        assert!((agg.mean_accuracy - 0.9).abs() < 1e-15 && agg.std_accuracy.abs() < 1e-15);
        let agg = aggregate_seeds(&[0.96, 0.97, 0.96, 0.97, 0.965].map(with_acc)).unwrap();
        assert!((agg.mean_accuracy - 0.965).abs() < 1e-12);
        assert!((agg.std_accuracy - 0.0050).abs() < 5e-5, "{}", agg.std_accuracy);
        assert!(aggregate_seeds(&[with_acc(0.5)]).is_err());
    }

    proptest! {
        #[test]
        fn confusion_consistency(pairs in prop::collection::vec((0usize..5, 0usize..5), 1..200)) {
            let preds: Vec<usize> = pairs.iter().map(|p| p.0).collect();
            let labels: Vec<usize> = pairs.iter().map(|p| p.1).collect();
            let m = compute_metrics(&preds, &labels).unwrap();
            let total: u64 = m.confusion.iter().flatten().sum();
            let trace: u64 = (0..5).map(|c| m.confusion[c][c]).sum();
            prop_assert_eq!(m.accuracy, trace as f64 / total as f64);
            for c in 0..5 {
                let row: u64 = m.confusion[c].iter().sum();
                prop_assert_eq!(row as usize, labels.iter().filter(|&&l| l == c).count());
                let cm = m.per_class[c];
                for v in [cm.precision, cm.recall, cm.f1] {
                    prop_assert!((0.0..=1.0).contains(&v));
                }
            }
        }
    }
}
