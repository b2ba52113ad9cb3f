//! Training and evaluation studies: per-modality ablation, cross-subject
//! transfer with frozen feature layers, and sensor-failure robustness, each
//! repeated over seeds and summarized in [`ExperimentReport`]s.

pub mod ablation;
pub mod metrics;
pub mod report;
pub mod robustness;
pub mod source;
pub mod training;
pub mod transfer;

pub use ablation::{random_baseline, run_modality_ablation, AblationOptions};
pub use metrics::{aggregate_seeds, compute_metrics, compute_metrics_for, f1_score, ClassMetrics, Metrics, SeedAggregate};
pub use report::{Condition, ExperimentReport, SeedResult};
pub use robustness::{run_robustness, run_robustness_study, single_sensor_conditions, TrainedRun};
pub use source::TrialSource;
pub use training::{
    build_model, evaluate, predict_classes, run_training, run_training_on, ModelChoice, ModelKind, TrainingOutcome,
};
pub use transfer::{run_transfer, run_transfer_study, target_split, TargetSplit, TransferMode, TransferPlan, TransferStudy};
