use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use exomotion::dataset::Label;
use exomotion::experiments::{ExperimentReport, Metrics};
use exomotion::fsutil::write_atomic;

use crate::CliError;

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(exomotion::Error::from)?;
    bytes.push(b'\n');
    Ok(write_atomic(path, &bytes)?)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    Ok(write_atomic(path, text.as_bytes())?)
}

/// File-name-safe condition key, e.g. `cnn_emg` or `mask_imu_rfoot`.
pub fn condition_key(report: &ExperimentReport) -> String {
    let c = &report.condition;
    let mut parts: Vec<String> = Vec::new();
    if let Some(m) = &c.model {
        parts.push(m.clone());
    }
    if let Some(m) = c.modality {
        if c.mask.is_none() && c.transfer_mode.is_none() {
            parts.push(m.to_string());
        }
    }
    if let Some(t) = c.transfer_mode {
        parts = vec![t.to_string()];
    }
    if let Some(m) = &c.mask {
        parts = vec![format!("mask_{m}")];
    }
    parts.join("_").replace(['-', '+'], "_")
}

/// Confusion counts with class names along both axes; rows are true
/// classes.
pub fn confusion_csv(metrics: &Metrics) -> String {
    let mut s = String::from("true\\predicted");
    for l in Label::ALL {
        let _ = write!(s, ",{}", l.slug());
    }
    s.push('\n');
    for (l, row) in Label::ALL.iter().zip(&metrics.confusion) {
        s.push_str(l.slug());
        for v in row {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

/// Fixed-width table, one row per condition.
pub fn summary_table(title: &str, reports: &[ExperimentReport]) -> String {
    let mut s = format!("{title}\n");
    let _ = writeln!(s, "{:<28} {:>8} {:>8} {:>6}", "condition", "mean", "std", "seeds");
    for r in reports {
        let std = r.std_accuracy.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            s,
            "{:<28} {:>8.4} {:>8} {:>6}",
            condition_key(r),
            r.mean_accuracy,
            std,
            r.seeds.len()
        );
    }
    s
}

/// Columnar `condition,mean,std` data for plotting.
pub fn plot_csv(reports: &[ExperimentReport]) -> String {
    let mut s = String::from("condition,mean,std\n");
    for r in reports {
        let std = r.std_accuracy.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(s, "{},{},{std}", condition_key(r), r.mean_accuracy);
    }
    s
}
