//! Trial data model, file formats, synthetic corpus and dataset splitting.

pub mod channels;
pub mod csv_io;
pub mod manifest;
pub mod preprocess;
pub mod split;
pub mod synth;
pub mod trial;

pub use channels::{
    canonical_channels, Axis, Channel, ChannelEntry, ChannelMap, ModalitySelection, Sensor, SensorUnit, Side,
    N_CHANNELS, N_EMG_CHANNELS, N_IMU_CHANNELS,
};
pub use csv_io::{load_trial_csv, load_trial_csv_as, trial_file_name, write_trial_csv, write_trial_csv_file};
pub use manifest::{load_manifest_trials, read_manifest, write_manifest, ManifestEntry};
pub use preprocess::{assemble_raw_trial, preprocess_trial, Preprocessor};
pub use split::{split_dataset, split_indices, SplitSpec};
pub use synth::{generate_corpus, generate_preprocessed_corpus, generate_synthetic_trial, CorpusSpec, SubjectProfile};
pub use trial::{
    apply_sensor_mask, select_modality, ChannelSubset, Label, SensorMask, Trial, N_CLASSES, N_SAMPLES,
    SAMPLE_RATE_HZ,
};
