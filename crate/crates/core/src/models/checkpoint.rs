//! Checkpoint files.
//!
//! A checkpoint is one JSON document:
//!
//! ```text
//! { "format": "exomotion-checkpoint", "version": 1, "model": { ... } }
//! ```
//!
//! `model` holds the model definition, its layer list, every parameter
//! array with its Adam moments and the optimizer step, batch-norm running
//! statistics, the frozen layer set and training metadata. Floats are
//! written in shortest round-trip form, so loading reproduces every value
//! bit for bit.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ModelState;
use crate::fsutil::write_atomic;
use crate::nn::LayerDef;
use crate::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "exomotion-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize)]
struct Envelope<'a> {
    format: &'a str,
    version: u32,
    model: &'a ModelState,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Deserialize)]
struct Owned {
    model: ModelState,
}

pub fn write_checkpoint<W: Write>(model: &ModelState, out: W) -> Result<()> {
    serde_json::to_writer(
        out,
        &Envelope {
            format: CHECKPOINT_FORMAT,
            version: CHECKPOINT_VERSION,
            model,
        },
    )?;
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<ModelState> {
    let mut text = String::new();
    input
        .read_to_string(&mut text)
        .map_err(|e| Error::Checkpoint(format!("unreadable checkpoint: {e}")))?;
    let header: Header =
        serde_json::from_str(&text).map_err(|e| Error::Checkpoint(format!("corrupt checkpoint: {e}")))?;
    if header.format != CHECKPOINT_FORMAT {
        return Err(Error::Checkpoint(format!("not a checkpoint (format {:?})", header.format)));
    }
    if header.version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "checkpoint version {} is not supported (expected {CHECKPOINT_VERSION})",
            header.version
        )));
    }
    let Owned { model } =
        serde_json::from_str(&text).map_err(|e| Error::Checkpoint(format!("corrupt checkpoint: {e}")))?;
    validate(&model)?;
    Ok(model)
}

fn validate(model: &ModelState) -> Result<()> {
    let bad = |msg: String| Error::Checkpoint(format!("inconsistent checkpoint: {msg}"));
    let layers = model.def.layers().map_err(|e| bad(e.to_string()))?;
    if layers != model.layers {
        return Err(bad("layer list does not match the model definition".into()));
    }
    if model.params.layers.len() != layers.len() {
        return Err(bad("parameter store has the wrong number of layers".into()));
    }
    for (i, (layer, p)) in layers.iter().zip(&model.params.layers).enumerate() {
        let shapes = layer.param_shapes();
        if shapes.len() != p.arrays.len() {
            return Err(bad(format!("layer {i} has {} arrays, expected {}", p.arrays.len(), shapes.len())));
        }
        for ((name, n), a) in shapes.iter().zip(&p.arrays) {
            if a.values.len() != *n || a.m.len() != *n || a.v.len() != *n {
                return Err(bad(format!("layer {i} array {name} has the wrong size")));
            }
        }
        match (layer, &p.running) {
            (LayerDef::BatchNorm { channels }, Some(r)) => {
                if r.mean.len() != *channels || r.var.len() != *channels || r.var.iter().any(|&v| v < 0.0) {
                    return Err(bad(format!("layer {i} running statistics are malformed")));
                }
            }
            (LayerDef::BatchNorm { .. }, None) => return Err(bad(format!("layer {i} lacks running statistics"))),
            (_, Some(_)) => return Err(bad(format!("layer {i} carries unexpected running statistics"))),
            _ => {}
        }
    }
    if model.frozen.iter().any(|&i| i >= layers.len()) {
        return Err(bad("frozen set names a missing layer".into()));
    }
    Ok(())
}

/// Writes the checkpoint through a temporary file and a rename, so a crash
/// never leaves a half-written file at `path`.
pub fn save_checkpoint(model: &ModelState, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_checkpoint(model, &mut buf)?;
    write_atomic(path, &buf)
}

pub fn load_checkpoint(path: &Path) -> Result<ModelState> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(std::io::BufReader::new(file))
}
