//! Conditioning of raw trials: EMG goes through ADC scaling, Hampel
//! despiking, a 0.2-400 Hz band-pass and normalization; IMU channels get a
//! 0.2-10 Hz band-pass and normalization.

use super::channels::{ChannelMap, N_CHANNELS};
use super::trial::{Label, Trial, N_SAMPLES};
use crate::dsp::{
    adc_to_voltage, apply_filter_zero_phase, design_butterworth_bandpass, hampel_filter,
    normalize_channel, upsample_linear, BiquadCascade, FilterSpec, HampelConfig, Modality,
};
use crate::{Error, Result};

/// IMU streams arrive at 25 Hz and are stretched onto the 1 kHz grid.
pub const IMU_NATIVE_SAMPLES: usize = 125;
pub const IMU_UPSAMPLE_FACTOR: usize = N_SAMPLES / IMU_NATIVE_SAMPLES;

/// Designed filters plus Hampel settings, reusable across trials.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    pub emg_spec: FilterSpec,
    pub imu_spec: FilterSpec,
    pub hampel: HampelConfig,
    emg: BiquadCascade,
    imu: BiquadCascade,
}

impl Preprocessor {
    pub fn new(emg_spec: FilterSpec, imu_spec: FilterSpec, hampel: HampelConfig) -> Result<Self> {
        hampel.validate()?;
        Ok(Self {
            emg: design_butterworth_bandpass(&emg_spec)?,
            imu: design_butterworth_bandpass(&imu_spec)?,
            emg_spec,
            imu_spec,
            hampel,
        })
    }

    pub fn standard() -> Self {
        Self::new(FilterSpec::emg(), FilterSpec::imu(), HampelConfig::default())
            .expect("standard filter settings are valid")
    }

    /// EMG chain on one channel of ADC counts, stopping before
    /// normalization.
    pub fn condition_emg(&self, counts: &[f64], despike: bool) -> Result<Vec<f64>> {
        let volts = adc_to_voltage(counts)?;
        let cleaned = if despike {
            hampel_filter(&volts, &self.hampel)?
        } else {
            volts
        };
        apply_filter_zero_phase(&self.emg, &cleaned)
    }

    /// IMU chain on one channel, stopping before normalization.
    pub fn condition_imu(&self, x: &[f64]) -> Result<Vec<f64>> {
        apply_filter_zero_phase(&self.imu, x)
    }

    pub fn process(&self, raw: &Trial, map: &ChannelMap) -> Result<Trial> {
        if raw.preprocessed {
            return Err(Error::Argument("trial is already preprocessed".into()));
        }
        let mut channels = Vec::with_capacity(N_CHANNELS);
        for (c, entry) in map.entries().iter().enumerate() {
            let x = raw.channel(c);
            let filtered = match entry.sensor.modality() {
                Modality::Emg => self.condition_emg(x, true)?,
                Modality::Imu => self.condition_imu(x)?,
            };
            channels.push(normalize_channel(&filtered));
        }
        Trial::from_channels(channels, raw.label, raw.subject_id, true)
    }
}

/// Runs the standard conditioning chain on a raw trial.
pub fn preprocess_trial(raw: &Trial, map: &ChannelMap) -> Result<Trial> {
    Preprocessor::standard().process(raw, map)
}

/// Builds a raw trial from 8 EMG rows at 1 kHz and 27 IMU rows given either
/// at the native 125 samples or already at 5000.
pub fn assemble_raw_trial(
    emg: Vec<Vec<f64>>,
    imu: Vec<Vec<f64>>,
    label: Label,
    subject_id: u32,
) -> Result<Trial> {
    let mut channels = emg;
    for row in imu {
        if row.len() == IMU_NATIVE_SAMPLES {
            channels.push(upsample_linear(&row, IMU_UPSAMPLE_FACTOR)?);
        } else {
            channels.push(row);
        }
    }
    Trial::from_channels(channels, label, subject_id, false)
}
