use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::channels::{ModalitySelection, SensorUnit, N_CHANNELS};
use crate::{Error, Result};

/// Samples per trial: 5 s at 1 kHz.
pub const N_SAMPLES: usize = 5000;
pub const SAMPLE_RATE_HZ: f64 = 1000.0;
pub const N_CLASSES: usize = 5;

/// Motion class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    TurnLeft,
    TurnRight,
    PickUpObject,
    Backwards,
    Forwards,
}

impl Label {
    pub const ALL: [Label; N_CLASSES] = [
        Label::TurnLeft,
        Label::TurnRight,
        Label::PickUpObject,
        Label::Backwards,
        Label::Forwards,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Result<Self> {
        Label::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::Argument(format!("class index {i} out of range")))
    }

    /// File-name token.
    pub fn slug(self) -> &'static str {
        match self {
            Label::TurnLeft => "turn-left",
            Label::TurnRight => "turn-right",
            Label::PickUpObject => "pick-up-object",
            Label::Backwards => "backwards",
            Label::Forwards => "forwards",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Label::ALL
            .into_iter()
            .find(|l| l.slug() == key)
            .ok_or_else(|| Error::Argument(format!("unknown label {s:?}")))
    }
}

/// One labelled 5 s recording, stored channel-major in canonical channel
/// order (`data[c * N_SAMPLES + t]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    data: Vec<f64>,
    pub label: Label,
    pub subject_id: u32,
    pub preprocessed: bool,
}

impl Trial {
    pub fn new(data: Vec<f64>, label: Label, subject_id: u32, preprocessed: bool) -> Result<Self> {
        if data.len() != N_CHANNELS * N_SAMPLES {
            return Err(Error::Shape(format!(
                "trial needs {N_CHANNELS} x {N_SAMPLES} values, got {}",
                data.len()
            )));
        }
        Ok(Self {
            data,
            label,
            subject_id,
            preprocessed,
        })
    }

    pub fn from_channels(channels: Vec<Vec<f64>>, label: Label, subject_id: u32, preprocessed: bool) -> Result<Self> {
        if channels.len() != N_CHANNELS || channels.iter().any(|c| c.len() != N_SAMPLES) {
            return Err(Error::Shape(format!(
                "trial needs {N_CHANNELS} channels of {N_SAMPLES} samples"
            )));
        }
        Self::new(channels.concat(), label, subject_id, preprocessed)
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.data[c * N_SAMPLES..(c + 1) * N_SAMPLES]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c * N_SAMPLES..(c + 1) * N_SAMPLES]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// A trial restricted to a subset of channels, kept in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSubset {
    pub data: Vec<f64>,
    /// Canonical indices of the kept channels.
    pub channels: Vec<usize>,
    pub label: Label,
    pub subject_id: u32,
}

impl ChannelSubset {
    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn channel(&self, i: usize) -> &[f64] {
        &self.data[i * N_SAMPLES..(i + 1) * N_SAMPLES]
    }
}

/// Copies the channels of `modality` out of `trial`.
pub fn select_modality(trial: &Trial, modality: ModalitySelection) -> ChannelSubset {
    let channels = modality.channels();
    let mut data = Vec::with_capacity(channels.len() * N_SAMPLES);
    for &c in &channels {
        data.extend_from_slice(trial.channel(c));
    }
    ChannelSubset {
        data,
        channels,
        label: trial.label,
        subject_id: trial.subject_id,
    }
}

/// Sensors to blank out at evaluation time.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensorMask {
    pub disabled: BTreeSet<SensorUnit>,
}

impl SensorMask {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn single(unit: SensorUnit) -> Self {
        Self {
            disabled: BTreeSet::from([unit]),
        }
    }

    /// Parses names like `imu_rfoot` or `emg_left`.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let disabled = names
            .iter()
            .map(|n| n.as_ref().parse::<SensorUnit>())
            .collect::<Result<_>>()?;
        Ok(Self { disabled })
    }

    pub fn is_empty(&self) -> bool {
        self.disabled.is_empty()
    }

    /// Canonical channels silenced by this mask, ascending.
    pub fn channels(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.disabled.iter().flat_map(|u| u.channels()).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn describe(&self) -> String {
        if self.disabled.is_empty() {
            "none".to_string()
        } else {
            self.disabled.iter().map(|u| u.name()).collect::<Vec<_>>().join("+")
        }
    }
}

/// Returns a copy of `trial` with every channel of the disabled sensors set
/// to zero.
pub fn apply_sensor_mask(trial: &Trial, mask: &SensorMask) -> Trial {
    let mut out = trial.clone();
    for c in mask.channels() {
        out.channel_mut(c).fill(0.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp_trial() -> Trial {
        let data = (0..N_CHANNELS * N_SAMPLES).map(|i| 1.0 + i as f64).collect();
        Trial::new(data, Label::Forwards, 1, true).unwrap()
    }

    fn zero_channels(t: &Trial) -> usize {
        (0..N_CHANNELS).filter(|&c| t.channel(c).iter().all(|v| *v == 0.0)).count()
    }

    #[test]
    fn shape_enforced() {
        assert!(Trial::new(vec![0.0; 10], Label::Forwards, 0, false).is_err());
    }

    #[test]
    fn modality_selection_sizes() {
        let t = ramp_trial();
        assert_eq!(select_modality(&t, ModalitySelection::All).n_channels(), 35);
        assert_eq!(select_modality(&t, ModalitySelection::ImuOnly).n_channels(), 27);
        let emg = select_modality(&t, ModalitySelection::EmgOnly);
        assert_eq!(emg.n_channels(), 8);
        assert_eq!(emg.channel(7), t.channel(7));
        let leg = select_modality(&t, ModalitySelection::SingleLegRight);
        assert_eq!(leg.n_channels(), 22);
        assert_eq!(leg.channels[..4], [4, 5, 6, 7]);
        assert_eq!(leg.channel(4), t.channel(17));
    }

    #[test]
    fn masks() {
        let t = ramp_trial();
        let foot = apply_sensor_mask(&t, &SensorMask::single(SensorUnit::ImuRfoot));
        assert_eq!(zero_channels(&foot), 9);
        for c in 0..26 {
            assert_eq!(foot.channel(c), t.channel(c));
        }
        assert_eq!(apply_sensor_mask(&t, &SensorMask::none()), t);
        let left = apply_sensor_mask(&t, &SensorMask::from_names(&["emg_left"]).unwrap());
        assert_eq!(zero_channels(&left), 4);
        assert_eq!(left.label, t.label);
        assert_eq!(apply_sensor_mask(&left, &SensorMask::single(SensorUnit::EmgLeft)), left);
        assert!(SensorMask::from_names(&["emg_middle"]).is_err());
    }

    #[test]
    fn labels_round_trip() {
        for l in Label::ALL {
            assert_eq!(l.slug().parse::<Label>().unwrap(), l);
            assert_eq!(Label::from_index(l.index()).unwrap(), l);
        }
        assert!(Label::from_index(5).is_err());
    }
}
