//! Flag parsing, the optional TOML config file, and resolution into a
//! validated [`RunConfig`].

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use exomotion::dataset::{ModalitySelection, SensorUnit};
use exomotion::experiments::{ModelChoice, ModelKind};
use exomotion::nn::TrainConfig;

use crate::CliError;

/// Every flag the tool understands. All are optional here so that a config
/// file can supply them; [`RunConfig::resolve`] applies defaults and checks
/// which flags a command accepts.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Options {
    /// TOML file of flag values; flags given on the command line win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Line-delimited JSON manifest of trial files.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// cnn or lstm.
    #[arg(long)]
    pub model: Option<String>,
    /// all, imu, emg or single-leg.
    #[arg(long)]
    pub modality: Option<String>,
    /// Number of seeds; seeds run from --seed upwards.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// First seed, also the corpus seed for `synth`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Mini-batch size.
    #[arg(long)]
    pub batch: Option<usize>,
    /// Adam learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Comma-separated sensors to drop one at a time, e.g. imu_rfoot,emg_left.
    #[arg(long)]
    pub sensors: Option<String>,
    /// Comma-separated subject ids used for pretraining.
    #[arg(long)]
    pub pretrain_subjects: Option<String>,
    #[arg(long)]
    pub target_subject: Option<u32>,
    #[arg(long)]
    pub finetune_per_class: Option<usize>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Also write columnar condition,mean,std files.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub emit_plot_data: Option<bool>,
    /// Trials per class and subject for `synth`.
    #[arg(long)]
    pub per_class: Option<usize>,
    /// Number of subjects for `synth`.
    #[arg(long)]
    pub subjects: Option<u32>,
    /// Time-step stride applied to LSTM inputs.
    #[arg(long)]
    pub lstm_stride: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Synth,
    Preprocess,
    Train,
    Ablate,
    Transfer,
    Robust,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Synth => "synth",
            CommandKind::Preprocess => "preprocess",
            CommandKind::Train => "train",
            CommandKind::Ablate => "ablate",
            CommandKind::Transfer => "transfer",
            CommandKind::Robust => "robust",
        }
    }

    fn accepts(self, flag: &str) -> bool {
        const TRAINING: &[&str] = &["manifest", "out", "seeds", "seed", "epochs", "batch", "lr", "jobs", "emit-plot-data"];
        let extra: &[&str] = match self {
            CommandKind::Synth => return ["out", "seed", "per-class", "subjects", "jobs"].contains(&flag),
            CommandKind::Preprocess => return ["manifest", "out", "jobs"].contains(&flag),
            CommandKind::Train => &["model", "modality", "lstm-stride"],
            CommandKind::Ablate => &["model", "modality", "lstm-stride"],
            CommandKind::Transfer => &["pretrain-subjects", "target-subject", "finetune-per-class"],
            CommandKind::Robust => &["sensors"],
        };
        TRAINING.contains(&flag) || extra.contains(&flag)
    }
}

impl Options {
    /// Names of the flags that carry a value.
    fn present(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut check = |set: bool, name: &'static str| {
            if set {
                out.push(name);
            }
        };
        check(self.manifest.is_some(), "manifest");
        check(self.out.is_some(), "out");
        check(self.model.is_some(), "model");
        check(self.modality.is_some(), "modality");
        check(self.seeds.is_some(), "seeds");
        check(self.seed.is_some(), "seed");
        check(self.epochs.is_some(), "epochs");
        check(self.batch.is_some(), "batch");
        check(self.lr.is_some(), "lr");
        check(self.sensors.is_some(), "sensors");
        check(self.pretrain_subjects.is_some(), "pretrain-subjects");
        check(self.target_subject.is_some(), "target-subject");
        check(self.finetune_per_class.is_some(), "finetune-per-class");
        check(self.jobs.is_some(), "jobs");
        check(self.emit_plot_data.is_some(), "emit-plot-data");
        check(self.per_class.is_some(), "per-class");
        check(self.subjects.is_some(), "subjects");
        check(self.lstm_stride.is_some(), "lstm-stride");
        out
    }

    /// Fills every unset field from `file`.
    fn or(self, file: Options) -> Options {
        Options {
            config: self.config,
            manifest: self.manifest.or(file.manifest),
            out: self.out.or(file.out),
            model: self.model.or(file.model),
            modality: self.modality.or(file.modality),
            seeds: self.seeds.or(file.seeds),
            seed: self.seed.or(file.seed),
            epochs: self.epochs.or(file.epochs),
            batch: self.batch.or(file.batch),
            lr: self.lr.or(file.lr),
            sensors: self.sensors.or(file.sensors),
            pretrain_subjects: self.pretrain_subjects.or(file.pretrain_subjects),
            target_subject: self.target_subject.or(file.target_subject),
            finetune_per_class: self.finetune_per_class.or(file.finetune_per_class),
            jobs: self.jobs.or(file.jobs),
            emit_plot_data: self.emit_plot_data.or(file.emit_plot_data),
            per_class: self.per_class.or(file.per_class),
            subjects: self.subjects.or(file.subjects),
            lstm_stride: self.lstm_stride.or(file.lstm_stride),
        }
    }

    /// Keeps only the fields `command` understands.
    fn restricted_to(mut self, command: CommandKind) -> Options {
        let keep = |name: &str| command.accepts(name);
        macro_rules! drop_unless {
            ($($field:ident => $name:literal),* $(,)?) => {
                $( if !keep($name) { self.$field = None; } )*
            };
        }
        drop_unless!(
            manifest => "manifest", out => "out", model => "model", modality => "modality",
            seeds => "seeds", seed => "seed", epochs => "epochs", batch => "batch", lr => "lr",
            sensors => "sensors", pretrain_subjects => "pretrain-subjects",
            target_subject => "target-subject", finetune_per_class => "finetune-per-class",
            jobs => "jobs", emit_plot_data => "emit-plot-data", per_class => "per-class",
            subjects => "subjects", lstm_stride => "lstm-stride",
        );
        self
    }
}

pub fn read_config_file(path: &Path) -> Result<Options, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Transfer study layout.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFlags {
    pub pretrain_subjects: BTreeSet<u32>,
    pub target_subject: u32,
    pub finetune_per_class: usize,
}

/// Fully resolved parameters of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub manifest: Option<PathBuf>,
    pub out: PathBuf,
    pub models: Vec<ModelChoice>,
    pub modalities: Vec<ModalitySelection>,
    pub seeds: Vec<u64>,
    pub train: TrainConfig,
    pub sensors: Vec<SensorUnit>,
    pub transfer: TransferFlags,
    pub jobs: Option<usize>,
    pub emit_plot_data: bool,
    pub per_class: usize,
    pub subjects: u32,
    pub corpus_seed: u64,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| usage(format!("invalid {what} {s:?}"))))
        .collect()
}

impl RunConfig {
    /// Merges flags over the config file, rejects flags the command does not
    /// take, applies defaults and validates ranges.
    pub fn resolve(command: CommandKind, flags: Options) -> Result<Self, CliError> {
        if let Some(bad) = flags.present().into_iter().find(|f| !command.accepts(f)) {
            return Err(usage(format!("`{}` does not take --{bad}", command.name())));
        }
        let file = match &flags.config {
            Some(path) => read_config_file(path)?.restricted_to(command),
            None => Options::default(),
        };
        let o = flags.or(file);

        let out = o.out.clone().ok_or_else(|| usage("--out is required"))?;
        let needs_manifest = command != CommandKind::Synth;
        if needs_manifest && o.manifest.is_none() {
            return Err(usage("--manifest is required"));
        }

        let lstm_stride = o.lstm_stride.unwrap_or(1);
        if lstm_stride == 0 {
            return Err(usage("--lstm-stride must be >= 1"));
        }
        let models = match (&o.model, command) {
            (Some(m), _) => vec![choice(m.parse::<ModelKind>()?, lstm_stride)],
            (None, CommandKind::Ablate) => vec![ModelChoice::cnn(), ModelChoice::lstm(lstm_stride)],
            (None, _) => vec![ModelChoice::cnn()],
        };
        let modalities = match (&o.modality, command) {
            (Some(m), _) => vec![m.parse::<ModalitySelection>()?],
            (None, CommandKind::Ablate) => ModalitySelection::ALL.to_vec(),
            (None, _) => vec![ModalitySelection::All],
        };

        let n_seeds = o.seeds.unwrap_or(5);
        if n_seeds == 0 {
            return Err(usage("--seeds must be >= 1"));
        }
        let first = o.seed.unwrap_or(0);
        let seeds: Vec<u64> = (0..n_seeds as u64).map(|k| first + k).collect();

        let defaults = TrainConfig::default();
        let train = TrainConfig {
            epochs: o.epochs.unwrap_or(defaults.epochs),
            batch_size: o.batch.unwrap_or(defaults.batch_size),
            learning_rate: o.lr.unwrap_or(defaults.learning_rate),
            ..defaults
        };
        train.validate()?;

        let sensors = match &o.sensors {
            Some(list) => {
                let units: Vec<SensorUnit> = parse_list(list, "sensor")?;
                if units.is_empty() {
                    return Err(usage("--sensors lists no sensors"));
                }
                let mut seen = BTreeSet::new();
                if let Some(dup) = units.iter().find(|u| !seen.insert(**u)) {
                    return Err(usage(format!("sensor {dup} listed twice")));
                }
                units
            }
            None => SensorUnit::ALL.to_vec(),
        };

        let pretrain_subjects: BTreeSet<u32> = match &o.pretrain_subjects {
            Some(list) => parse_list(list, "subject id")?.into_iter().collect(),
            None => [0, 1].into(),
        };
        let transfer = TransferFlags {
            target_subject: o.target_subject.unwrap_or(2),
            finetune_per_class: o.finetune_per_class.unwrap_or(10),
            pretrain_subjects,
        };
        if command == CommandKind::Transfer {
            if transfer.pretrain_subjects.is_empty() {
                return Err(usage("--pretrain-subjects lists no subjects"));
            }
            if transfer.pretrain_subjects.contains(&transfer.target_subject) {
                return Err(usage("the target subject cannot also be a pretraining subject"));
            }
            if transfer.finetune_per_class == 0 {
                return Err(usage("--finetune-per-class must be >= 1"));
            }
        }

        if o.jobs == Some(0) {
            return Err(usage("--jobs must be >= 1"));
        }
        let per_class = o.per_class.unwrap_or(100);
        let subjects = o.subjects.unwrap_or(3);
        if per_class == 0 || subjects == 0 {
            return Err(usage("--per-class and --subjects must be >= 1"));
        }

        Ok(Self {
            command,
            manifest: o.manifest,
            out,
            models,
            modalities,
            seeds,
            train,
            sensors,
            transfer,
            jobs: o.jobs,
            emit_plot_data: o.emit_plot_data.unwrap_or(false),
            per_class,
            subjects,
            corpus_seed: first,
        })
    }
}

fn choice(kind: ModelKind, lstm_stride: usize) -> ModelChoice {
    match kind {
        ModelKind::Cnn => ModelChoice::cnn(),
        ModelKind::Lstm => ModelChoice::lstm(lstm_stride),
    }
}
