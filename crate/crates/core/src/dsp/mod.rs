//! Signal conditioning for the EMG and IMU streams.
//!
//! Everything here is a pure function on `f64` slices. The full per-channel
//! chains are assembled in [`crate::dataset::preprocess`].

mod adc;
mod butterworth;
mod hampel;
mod normalize;
mod resample;
mod zero_phase;

pub use adc::{adc_to_voltage, ADC_MAX_COUNT, ADC_REFERENCE_VOLTS};
pub use butterworth::{design_butterworth_bandpass, Biquad, BiquadCascade, FilterSpec};
pub use hampel::{hampel_filter, HampelConfig};
pub use normalize::{normalize_channel, DEGENERATE_STD};
pub use resample::upsample_linear;
pub use zero_phase::{apply_filter_zero_phase, edge_padding};

use serde::{Deserialize, Serialize};

/// Sensor family a channel belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modality {
    Emg,
    Imu,
}

/// One raw sensor stream before any conditioning.
#[derive(Debug, Clone, PartialEq)]
pub struct RawChannel {
    pub samples: Vec<f64>,
    pub sample_rate_hz: f64,
    pub modality: Modality,
}

impl RawChannel {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64, modality: Modality) -> crate::Result<Self> {
        if samples.is_empty() {
            return Err(crate::Error::Size {
                what: "raw channel",
                needed: 1,
                got: 0,
            });
        }
        if !(sample_rate_hz > 0.0) {
            return Err(crate::Error::Config(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if modality == Modality::Emg {
            if let Some((index, &value)) = samples
                .iter()
                .enumerate()
                .find(|(_, v)| !(0.0..=ADC_MAX_COUNT).contains(*v))
            {
                return Err(crate::Error::Range {
                    index,
                    value,
                    min: 0.0,
                    max: ADC_MAX_COUNT,
                });
            }
        }
        Ok(Self {
            samples,
            sample_rate_hz,
            modality,
        })
    }
}
