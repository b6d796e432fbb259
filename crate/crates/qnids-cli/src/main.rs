//! Command-line entry: preprocess, train, transfer, evaluate, inspect.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration
//! error (clap argument errors also exit 2).

mod commands;
mod config;

use clap::{Parser, Subcommand};
use commands::evaluate::SplitArg;
use commands::CliError;
use config::Overrides;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "qnids",
    version,
    about = "Q-learning network intrusion detection over flow records"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct CommonRunArgs {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, default_value = "qnids-out")]
    out: PathBuf,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(clap::Args, Debug)]
struct TrainingArgs {
    /// Algorithm override: dqn or ddqn.
    #[arg(long)]
    algo: Option<String>,
    /// Loss override: mse, cce, kld, or huber.
    #[arg(long)]
    loss: Option<String>,
    /// Epoch count override.
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the dataset artifact from raw CSV or synthetic generation.
    Preprocess {
        #[command(flatten)]
        common: CommonRunArgs,
    },
    /// Train a Q-network on a preprocessed dataset.
    Train {
        #[command(flatten)]
        common: CommonRunArgs,
        #[command(flatten)]
        training: TrainingArgs,
        /// Train once per loss function and print a comparison table.
        #[arg(long)]
        sweep: bool,
    },
    /// Retrain a saved model's head on a new dataset, conv layers frozen.
    Transfer {
        #[command(flatten)]
        common: CommonRunArgs,
        #[command(flatten)]
        training: TrainingArgs,
        /// Weights file of the already-trained source model.
        #[arg(long)]
        source: PathBuf,
    },
    /// Score a saved model on a dataset split.
    Evaluate {
        /// Weights file to evaluate.
        #[arg(long)]
        model: PathBuf,
        /// Preprocessed dataset artifact.
        #[arg(long)]
        data: PathBuf,
        /// Which split to score.
        #[arg(long, value_enum, default_value_t = SplitArg::Test)]
        split: SplitArg,
        /// Also write report files here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Describe a model or dataset artifact.
    Inspect {
        /// File to describe.
        path: PathBuf,
    },
}

fn overrides_from(common: &CommonRunArgs, training: Option<&TrainingArgs>) -> Result<Overrides, CliError> {
    let mut ov = Overrides {
        seed: common.seed,
        ..Overrides::default()
    };
    if let Some(t) = training {
        if let Some(algo) = &t.algo {
            ov.algorithm = Some(
                algo.parse()
                    .map_err(|e| CliError::Usage(format!("--algo: {e}")))?,
            );
        }
        if let Some(loss) = &t.loss {
            ov.loss = Some(
                loss.parse()
                    .map_err(|e| CliError::Usage(format!("--loss: {e}")))?,
            );
        }
        ov.epochs = t.epochs;
    }
    Ok(ov)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Preprocess { common } => {
            let ov = overrides_from(&common, None)?;
            commands::preprocess::run(common.config.as_deref(), &common.out, &ov)
        }
        Command::Train {
            common,
            training,
            sweep,
        } => {
            let ov = overrides_from(&common, Some(&training))?;
            commands::train::run(common.config.as_deref(), &common.out, &ov, sweep)
        }
        Command::Transfer {
            common,
            training,
            source,
        } => {
            let ov = overrides_from(&common, Some(&training))?;
            commands::transfer::run(common.config.as_deref(), &common.out, &ov, &source)
        }
        Command::Evaluate {
            model,
            data,
            split,
            out,
        } => commands::evaluate::run(&model, &data, split, out.as_deref()),
        Command::Inspect { path } => commands::inspect::run(&path),
    }
}

fn main() -> ExitCode {
    // Die quietly when stdout closes early (`qnids inspect ... | head`)
    // like any other command-line tool instead of panicking mid-print.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
