//! Physical sensor layout and the column map for trial files.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dsp::Modality;
use crate::{Error, Result};

pub const N_CHANNELS: usize = 35;
pub const N_EMG_CHANNELS: usize = 8;
pub const N_IMU_CHANNELS: usize = 27;
pub const IMU_AXES: usize = 9;

/// One recording site: an EMG electrode pair or an IMU unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Sensor {
    EmgLTa,
    EmgLGm,
    EmgLGl,
    EmgLSol,
    EmgRTa,
    EmgRGm,
    EmgRGl,
    EmgRSol,
    ImuLshank,
    ImuRshank,
    ImuRfoot,
}

impl Sensor {
    pub const ALL: [Sensor; 11] = [
        Sensor::EmgLTa,
        Sensor::EmgLGm,
        Sensor::EmgLGl,
        Sensor::EmgLSol,
        Sensor::EmgRTa,
        Sensor::EmgRGm,
        Sensor::EmgRGl,
        Sensor::EmgRSol,
        Sensor::ImuLshank,
        Sensor::ImuRshank,
        Sensor::ImuRfoot,
    ];

    pub fn modality(self) -> Modality {
        match self {
            Sensor::ImuLshank | Sensor::ImuRshank | Sensor::ImuRfoot => Modality::Imu,
            _ => Modality::Emg,
        }
    }

    pub fn side(self) -> Side {
        match self {
            Sensor::EmgLTa | Sensor::EmgLGm | Sensor::EmgLGl | Sensor::EmgLSol | Sensor::ImuLshank => {
                Side::Left
            }
            _ => Side::Right,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// IMU axis, in the per-unit column order acc xyz, gyro xyz, mag xyz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Axis {
    AccX,
    AccY,
    AccZ,
    GyroX,
    GyroY,
    GyroZ,
    MagX,
    MagY,
    MagZ,
}

impl Axis {
    pub const ALL: [Axis; 9] = [
        Axis::AccX,
        Axis::AccY,
        Axis::AccZ,
        Axis::GyroX,
        Axis::GyroY,
        Axis::GyroZ,
        Axis::MagX,
        Axis::MagY,
        Axis::MagZ,
    ];
}

/// A logical channel: which sensor, and which axis for IMUs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Channel {
    pub sensor: Sensor,
    pub axis: Option<Axis>,
}

/// The canonical channel order used inside [`super::Trial`]: the eight EMG
/// channels (left TA, GM, GL, SOL, then right), followed by the left shank,
/// right shank and right foot IMUs with nine axes each.
pub fn canonical_channels() -> [Channel; N_CHANNELS] {
    let mut out = [Channel {
        sensor: Sensor::EmgLTa,
        axis: None,
    }; N_CHANNELS];
    for (i, sensor) in Sensor::ALL[..N_EMG_CHANNELS].iter().enumerate() {
        out[i] = Channel {
            sensor: *sensor,
            axis: None,
        };
    }
    for (u, sensor) in [Sensor::ImuLshank, Sensor::ImuRshank, Sensor::ImuRfoot].iter().enumerate() {
        for (a, axis) in Axis::ALL.iter().enumerate() {
            out[N_EMG_CHANNELS + u * IMU_AXES + a] = Channel {
                sensor: *sensor,
                axis: Some(*axis),
            };
        }
    }
    out
}

/// Canonical index of a channel.
pub fn canonical_index(channel: Channel) -> Option<usize> {
    canonical_channels().iter().position(|c| *c == channel)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelEntry {
    /// Zero-based column in the trial file.
    pub index: usize,
    pub sensor: Sensor,
    pub axis: Option<Axis>,
}

/// Where each logical channel lives in a trial CSV file.
///
/// `entries[c]` describes canonical channel `c`; its `index` is the file
/// column holding it. The default map is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelMap {
    entries: Vec<ChannelEntry>,
}

impl Default for ChannelMap {
    fn default() -> Self {
        Self::canonical()
    }
}

impl ChannelMap {
    pub fn canonical() -> Self {
        let entries = canonical_channels()
            .iter()
            .enumerate()
            .map(|(index, c)| ChannelEntry {
                index,
                sensor: c.sensor,
                axis: c.axis,
            })
            .collect();
        Self { entries }
    }

    /// Builds a map from arbitrary entries, reordering them into canonical
    /// channel order.
    pub fn new(entries: Vec<ChannelEntry>) -> Result<Self> {
        if entries.len() != N_CHANNELS {
            return Err(Error::Config(format!(
                "channel map needs {N_CHANNELS} entries, got {}",
                entries.len()
            )));
        }
        let mut seen_col = [false; N_CHANNELS];
        let mut slots: [Option<ChannelEntry>; N_CHANNELS] = [None; N_CHANNELS];
        for e in entries {
            if e.index >= N_CHANNELS || std::mem::replace(&mut seen_col[e.index], true) {
                return Err(Error::Config(format!(
                    "channel map column {} is out of range or repeated",
                    e.index
                )));
            }
            let c = canonical_index(Channel {
                sensor: e.sensor,
                axis: e.axis,
            })
            .ok_or_else(|| {
                Error::Config(format!("{:?}/{:?} is not a valid channel", e.sensor, e.axis))
            })?;
            if slots[c].replace(e).is_some() {
                return Err(Error::Config(format!(
                    "channel {:?}/{:?} appears twice",
                    e.sensor, e.axis
                )));
            }
        }
        Ok(Self {
            entries: slots.into_iter().map(|e| e.expect("35 distinct channels")).collect(),
        })
    }

    pub fn entries(&self) -> &[ChannelEntry] {
        &self.entries
    }

    /// File column holding canonical channel `c`.
    pub fn column_of(&self, c: usize) -> usize {
        self.entries[c].index
    }
}

/// Channel subsets used for the modality ablation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModalitySelection {
    All,
    ImuOnly,
    EmgOnly,
    SingleLegRight,
}

impl ModalitySelection {
    pub const ALL: [ModalitySelection; 4] = [
        ModalitySelection::All,
        ModalitySelection::ImuOnly,
        ModalitySelection::EmgOnly,
        ModalitySelection::SingleLegRight,
    ];

    /// Canonical channel indices kept, in canonical order.
    pub fn channels(self) -> Vec<usize> {
        canonical_channels()
            .iter()
            .enumerate()
            .filter(|(_, c)| match self {
                ModalitySelection::All => true,
                ModalitySelection::ImuOnly => c.sensor.modality() == Modality::Imu,
                ModalitySelection::EmgOnly => c.sensor.modality() == Modality::Emg,
                ModalitySelection::SingleLegRight => c.sensor.side() == Side::Right,
            })
            .map(|(i, _)| i)
            .collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            ModalitySelection::All => "all",
            ModalitySelection::ImuOnly => "imu",
            ModalitySelection::EmgOnly => "emg",
            ModalitySelection::SingleLegRight => "single-leg",
        }
    }
}

impl fmt::Display for ModalitySelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModalitySelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "all" => Ok(Self::All),
            "imu" | "imu-only" | "imu_only" => Ok(Self::ImuOnly),
            "emg" | "emg-only" | "emg_only" => Ok(Self::EmgOnly),
            "single-leg" | "single_leg" | "single-leg-right" | "single_leg_right" => {
                Ok(Self::SingleLegRight)
            }
            other => Err(Error::Argument(format!("unknown modality {other:?}"))),
        }
    }
}

/// A maskable physical unit: one IMU or one leg's four EMG electrodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorUnit {
    ImuLshank,
    ImuRshank,
    ImuRfoot,
    EmgLeft,
    EmgRight,
}

impl SensorUnit {
    pub const ALL: [SensorUnit; 5] = [
        SensorUnit::ImuLshank,
        SensorUnit::ImuRshank,
        SensorUnit::ImuRfoot,
        SensorUnit::EmgLeft,
        SensorUnit::EmgRight,
    ];

    pub fn contains(self, sensor: Sensor) -> bool {
        match self {
            SensorUnit::ImuLshank => sensor == Sensor::ImuLshank,
            SensorUnit::ImuRshank => sensor == Sensor::ImuRshank,
            SensorUnit::ImuRfoot => sensor == Sensor::ImuRfoot,
            SensorUnit::EmgLeft => sensor.modality() == Modality::Emg && sensor.side() == Side::Left,
            SensorUnit::EmgRight => sensor.modality() == Modality::Emg && sensor.side() == Side::Right,
        }
    }

    /// Canonical channel indices belonging to this unit.
    pub fn channels(self) -> Vec<usize> {
        canonical_channels()
            .iter()
            .enumerate()
            .filter(|(_, c)| self.contains(c.sensor))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            SensorUnit::ImuLshank => "imu_lshank",
            SensorUnit::ImuRshank => "imu_rshank",
            SensorUnit::ImuRfoot => "imu_rfoot",
            SensorUnit::EmgLeft => "emg_left",
            SensorUnit::EmgRight => "emg_right",
        }
    }
}

impl fmt::Display for SensorUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SensorUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        SensorUnit::ALL
            .into_iter()
            .find(|u| u.name() == key)
            .ok_or_else(|| Error::Argument(format!("unknown sensor {s:?}")))
    }
}
