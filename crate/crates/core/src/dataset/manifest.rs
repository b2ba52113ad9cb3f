//! Line-delimited JSON manifest: one `{"path", "label", "subject"}` record
//! per trial. Relative paths resolve against the manifest's directory.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::channels::ChannelMap;
use super::csv_io::load_trial_csv_as;
use super::trial::{Label, Trial};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: Label,
    pub subject: u32,
    /// Whether the file already holds conditioned signals.
    #[serde(default)]
    pub preprocessed: bool,
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let mut entry: ManifestEntry = serde_json::from_str(line).map_err(|e| {
                Error::Data(format!("{} line {}: {e}", path.display(), i + 1))
            })?;
            if entry.path.is_relative() {
                entry.path = base.join(&entry.path);
            }
            Ok(entry)
        })
        .collect()
}

/// Serializes entries, one JSON object per line.
pub fn write_manifest<W: Write>(entries: &[ManifestEntry], mut out: W) -> Result<()> {
    for e in entries {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n").map_err(|e| Error::io("<manifest>", e))?;
    }
    Ok(())
}

pub fn load_manifest_trials(entries: &[ManifestEntry], map: &ChannelMap) -> Result<Vec<Trial>> {
    entries
        .iter()
        .map(|e| load_trial_csv_as(&e.path, map, e.label, e.subject, e.preprocessed))
        .collect()
}
