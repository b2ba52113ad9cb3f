use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod options;
mod output;

use options::{CommandKind, Options, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] exomotion::Error),
    #[error("check failed: {0}")]
    Check(String),
}

#[derive(Parser)]
#[command(name = "exomotion", version, about = "Motion-intent classification from EMG and IMU trials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic raw corpus and its manifest.
    Synth(Options),
    /// Filter and normalize raw trials listed in a manifest.
    Preprocess(Options),
    /// Train one model per seed and report test metrics.
    Train(Options),
    /// Compare models and sensor modalities against a random baseline.
    Ablate(Options),
    /// Cross-subject transfer with frozen convolutional layers.
    Transfer(Options),
    /// Evaluate with one sensor at a time switched off.
    Robust(Options),
}

fn run(kind: CommandKind, opts: Options) -> Result<(), CliError> {
    // Every problem found while resolving flags is a usage error.
    let cfg = RunConfig::resolve(kind, opts).map_err(|e| match e {
        CliError::Core(e) => CliError::Usage(e.to_string()),
        other => other,
    })?;
    if let Some(jobs) = cfg.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {jobs} workers: {e}")))?;
    }
    match kind {
        CommandKind::Synth => commands::synth(&cfg),
        CommandKind::Preprocess => commands::preprocess(&cfg),
        CommandKind::Train => commands::train(&cfg),
        CommandKind::Ablate => commands::ablate(&cfg),
        CommandKind::Transfer => commands::transfer(&cfg),
        CommandKind::Robust => commands::robust(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, opts) = match cli.command {
        Command::Synth(o) => (CommandKind::Synth, o),
        Command::Preprocess(o) => (CommandKind::Preprocess, o),
        Command::Train(o) => (CommandKind::Train, o),
        Command::Ablate(o) => (CommandKind::Ablate, o),
        Command::Transfer(o) => (CommandKind::Transfer, o),
        Command::Robust(o) => (CommandKind::Robust, o),
    };
    match run(kind, opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Usage(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
