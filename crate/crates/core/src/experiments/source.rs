use crate::dataset::{ModalitySelection, SensorMask, Trial, N_SAMPLES};
use crate::models::SampleSource;

/// Trials viewed through a channel selection, optionally with some sensors
/// zeroed. Channels are gathered per batch, so no copy of the corpus is
/// made.
#[derive(Debug, Clone)]
pub struct TrialSource<'a> {
    trials: &'a [Trial],
    channels: Vec<usize>,
    /// Positions within `channels` that read as zero.
    zeroed: Vec<bool>,
}

impl<'a> TrialSource<'a> {
    pub fn new(trials: &'a [Trial], modality: ModalitySelection) -> Self {
        let channels = modality.channels();
        let zeroed = vec![false; channels.len()];
        Self {
            trials,
            channels,
            zeroed,
        }
    }

    /// Same view with every channel of the masked sensors reading zero.
    pub fn masked(&self, mask: &SensorMask) -> Self {
        let off = mask.channels();
        let zeroed = self.channels.iter().map(|c| off.contains(c)).collect();
        Self {
            zeroed,
            ..self.clone()
        }
    }

    pub fn trials(&self) -> &'a [Trial] {
        self.trials
    }
}

impl SampleSource for TrialSource<'_> {
    fn len(&self) -> usize {
        self.trials.len()
    }

    fn channels(&self) -> usize {
        self.channels.len()
    }

    fn length(&self) -> usize {
        N_SAMPLES
    }

    fn label(&self, i: usize) -> usize {
        self.trials[i].label.index()
    }

    fn fill(&self, i: usize, out: &mut [f64]) {
        let trial = &self.trials[i];
        for (k, (&c, &off)) in self.channels.iter().zip(&self.zeroed).enumerate() {
            let dst = &mut out[k * N_SAMPLES..(k + 1) * N_SAMPLES];
            if off {
                dst.fill(0.0);
            } else {
                dst.copy_from_slice(trial.channel(c));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{apply_sensor_mask, select_modality, Label, SensorUnit};

    fn trial() -> Trial {
        Trial::new((0..35 * N_SAMPLES).map(|v| v as f64 + 1.0).collect(), Label::Backwards, 0, true).unwrap()
    }

    #[test]
    fn matches_dataset_operations() {
        let trials = vec![trial()];
        for m in ModalitySelection::ALL {
            let src = TrialSource::new(&trials, m);
            let mut out = vec![0.0; src.channels() * N_SAMPLES];
            src.fill(0, &mut out);
            assert_eq!(out, select_modality(&trials[0], m).data);
        }
        let mask = SensorMask::single(SensorUnit::ImuRfoot);
        let src = TrialSource::new(&trials, ModalitySelection::All).masked(&mask);
        let mut out = vec![0.0; 35 * N_SAMPLES];
        src.fill(0, &mut out);
        assert_eq!(out, apply_sensor_mask(&trials[0], &mask).data());
    }
}
