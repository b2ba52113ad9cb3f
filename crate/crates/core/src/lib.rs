//! Motion-intent classification toolkit for an EMG + IMU instrumented ankle
//! exoskeleton.
//!
//! The crate is split along the processing chain:
//!
//! * [`dsp`] turns raw ADC counts and IMU traces into filtered, normalized,
//!   time-aligned channels.
//! * [`dataset`] holds the 35 x 5000 trial model, CSV/manifest IO, the
//!   synthetic trial generator, splitting and channel masking.
//! * [`nn`] is a small dense-tensor engine (conv, batch norm, pooling,
//!   dropout, fully connected, LSTM, softmax cross-entropy, Adam).
//! * [`models`] assembles the CNN and LSTM classifiers and handles
//!   parameter accounting, freezing and checkpoints.
//! * [`experiments`] trains and evaluates across seeds, modalities, transfer
//!   plans and sensor failures.

pub mod dataset;
pub mod dsp;
pub mod error;
pub mod experiments;
pub mod fsutil;
pub mod models;
pub mod nn;

pub use error::{Error, Result};
