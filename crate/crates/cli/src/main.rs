//! `sa-predict`: batch front end for per-object situation awareness
//! prediction. Every command is a pure function of its inputs, flags and
//! seed; `--threads` only changes how fast it runs.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::UsageError;

#[derive(Debug, Parser)]
#[command(
    name = "sa-predict",
    version,
    about = "Per-object driver situation awareness prediction"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Dataset directory (manifest.json, scenes/, gaze/, labels.csv).
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,
    /// Seed recorded in every artifact; required by train, eval and synth.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file or directory, depending on the command.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON file with `pipeline`, `features`, `fixation_rule` and `synth`
    /// overrides.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the 30-column feature table as CSV.
    Features,
    /// Fit a method on the whole dataset and write the model JSON.
    Train(MethodArgs),
    /// Pause-out cross validation: report JSON and ROC CSV per method.
    Eval(EvalArgs),
    /// Score a dataset with a trained model and write its ROC CSV.
    Roc {
        /// Model JSON written by `train`.
        #[arg(long)]
        model: PathBuf,
    },
    /// Fixation-rule baseline sweeps over radius and/or duration.
    Baseline1 {
        #[arg(long, value_enum, default_value_t = Sweep::Both)]
        sweep: Sweep,
    },
    /// PCA loading table of the scaled features.
    PcaReport {
        /// Number of leading components to report.
        #[arg(long, default_value_t = 6)]
        top: usize,
        /// Preset whose feature columns are analysed.
        #[arg(long, default_value = "method12")]
        method: String,
    },
    /// Generate a synthetic dataset with its oracle trace.
    Synth {
        #[arg(long)]
        scenes: Option<usize>,
        #[arg(long)]
        participants: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Sweep {
    Radius,
    Duration,
    Both,
}

#[derive(Debug, Args)]
struct MethodArgs {
    /// Preset name: baseline1, baseline3, method1, method2, method12, method123.
    #[arg(long)]
    method: String,
    /// Number of PCA components, or `auto`.
    #[arg(long)]
    pca_k: Option<String>,
    /// Memory capacity N; adds a memory stage to presets without one.
    #[arg(long)]
    memory_n: Option<usize>,
    /// Memory shape: tanh, step or linear.
    #[arg(long)]
    memory_shape: Option<String>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    method: MethodArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let validation = err.chain().any(|cause| {
        cause.downcast_ref::<UsageError>().is_some()
            || cause
                .downcast_ref::<sa_core::Error>()
                .is_some_and(sa_core::Error::is_validation)
    });
    if validation {
        2
    } else {
        1
    }
}
