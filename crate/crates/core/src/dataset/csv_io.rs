//! Trial CSV files: 5000 rows x 35 numeric columns, no header, one file
//! per trial, named `<subject>_<label>_<index>.csv`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::channels::{ChannelMap, N_CHANNELS};
use super::trial::{Label, Trial, N_SAMPLES};
use crate::{Error, Result};

pub fn trial_file_name(subject_id: u32, label: Label, index: usize) -> String {
    format!("{subject_id}_{}_{index}.csv", label.slug())
}

/// Recovers `(subject, label, index)` from a trial file name.
pub fn parse_trial_file_name(path: &Path) -> Result<(u32, Label, usize)> {
    let bad = || Error::Argument(format!("{} is not named <subject>_<label>_<index>.csv", path.display()));
    let stem = path.file_stem().and_then(|s| s.to_str()).ok_or_else(bad)?;
    let (subject, rest) = stem.split_once('_').ok_or_else(bad)?;
    let (label, index) = rest.rsplit_once('_').ok_or_else(bad)?;
    Ok((
        subject.parse().map_err(|_| bad())?,
        label.parse()?,
        index.parse().map_err(|_| bad())?,
    ))
}

/// Reads the numeric matrix of a trial file into canonical channel-major
/// order.
pub fn read_trial_matrix(path: &Path, map: &ChannelMap) -> Result<Vec<f64>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(std::io::BufReader::new(file));

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(N_SAMPLES);
    let mut widest = 0;
    let mut ragged = false;
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        widest = widest.max(record.len());
        if record.len() != N_CHANNELS {
            ragged = true;
            continue;
        }
        if ragged {
            continue;
        }
        let mut values = Vec::with_capacity(N_CHANNELS);
        for (col, cell) in record.iter().enumerate() {
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        row,
                        col,
                        cell: cell.to_string(),
                    })
                }
            }
        }
        rows.push(values);
    }
    let n_rows = reader.position().record() as usize;
    if ragged || n_rows != N_SAMPLES {
        return Err(Error::Format {
            path: path.to_path_buf(),
            expected_rows: N_SAMPLES,
            expected_cols: N_CHANNELS,
            rows: n_rows,
            cols: widest,
        });
    }

    let mut data = vec![0.0; N_CHANNELS * N_SAMPLES];
    for c in 0..N_CHANNELS {
        let col = map.column_of(c);
        for (t, row) in rows.iter().enumerate() {
            data[c * N_SAMPLES + t] = row[col];
        }
    }
    Ok(data)
}

/// Loads a trial, taking label and subject from the file name. The trial is
/// marked raw; use [`load_trial_csv_as`] when that is not the case.
pub fn load_trial_csv(path: &Path, map: &ChannelMap) -> Result<Trial> {
    let (subject, label, _) = parse_trial_file_name(path)?;
    load_trial_csv_as(path, map, label, subject, false)
}

pub fn load_trial_csv_as(
    path: &Path,
    map: &ChannelMap,
    label: Label,
    subject_id: u32,
    preprocessed: bool,
) -> Result<Trial> {
    Trial::new(read_trial_matrix(path, map)?, label, subject_id, preprocessed)
}

/// Writes `trial` with each channel at its mapped column. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn write_trial_csv<W: Write>(trial: &Trial, map: &ChannelMap, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    let mut by_column = [0usize; N_CHANNELS];
    for (c, slot) in (0..N_CHANNELS).map(|c| (c, map.column_of(c))) {
        by_column[slot] = c;
    }
    let write = |out: &mut BufWriter<W>| -> std::io::Result<()> {
        for t in 0..N_SAMPLES {
            for (j, &c) in by_column.iter().enumerate() {
                if j > 0 {
                    out.write_all(b",")?;
                }
                write!(out, "{}", trial.channel(c)[t])?;
            }
            out.write_all(b"\n")?;
        }
        out.flush()
    };
    write(&mut out).map_err(|e| Error::io("<trial csv>", e))
}

/// Writes a trial file atomically, so readers never see a partial matrix.
pub fn write_trial_csv_file(trial: &Trial, map: &ChannelMap, path: &Path) -> Result<()> {
    let mut bytes = Vec::new();
    write_trial_csv(trial, map, &mut bytes)?;
    crate::fsutil::write_atomic(path, &bytes)
}
