//! Subcommand implementations and shared plumbing.

pub mod evaluate;
pub mod inspect;
pub mod preprocess;
pub mod train;
pub mod transfer;

use crate::config::{ConfigError, Overrides, Resolved, RunConfig};
use qnids_core::agent::{Agent, AgentError};
use qnids_core::data::{DatasetArtifact, DatasetFileError};
use qnids_core::metrics::{evaluate as evaluate_net, MetricsError};
use qnids_core::nn::WeightFileError;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// Errors split by exit code: usage and configuration problems exit 2,
/// runtime failures exit 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<AgentError> for CliError {
    fn from(e: AgentError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<DatasetFileError> for CliError {
    fn from(e: DatasetFileError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<WeightFileError> for CliError {
    fn from(e: WeightFileError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// Loads and resolves the run configuration; a missing `--config` flag
/// means pure defaults.
pub fn load_resolved(
    config: Option<&Path>,
    out: &Path,
    overrides: &Overrides,
) -> Result<Resolved, CliError> {
    let cfg = match config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    Ok(crate::config::resolve(&cfg, out, overrides)?)
}

/// Loads a preprocessed dataset, turning an absent file into a usage error
/// that points at the fix.
pub fn load_artifact(path: &Path) -> Result<DatasetArtifact, CliError> {
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "dataset {} not found; run `qnids preprocess` first",
            path.display()
        )));
    }
    Ok(DatasetArtifact::load(path)?)
}

/// Summary of one completed training run.
pub struct RunOutcome {
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub epochs_run: usize,
}

/// Trains the agent on the artifact's training split, then writes the full
/// artifact set: model.bin, train_log.csv, eval_report.{json,txt},
/// confusion.csv, and config.resolved.toml.
pub fn run_training(
    agent: &mut Agent,
    artifact: &DatasetArtifact,
    out_dir: &Path,
    resolved: &Resolved,
) -> Result<RunOutcome, CliError> {
    fs::create_dir_all(out_dir)?;
    let log = agent.train_with_progress(&artifact.train, |e| {
        eprintln!(
            "epoch {:>3}  reward {:>7}  loss {:>12.6}  train acc {:>7.4}  eps {:.4}",
            e.epoch, e.cumulative_reward, e.mean_loss, e.train_accuracy, e.epsilon
        );
    })?;
    agent.network().save(&out_dir.join("model.bin"))?;
    fs::write(out_dir.join("train_log.csv"), log.to_csv())?;
    let labels = &artifact.test.label_names;
    let report = evaluate_net(agent.network(), &artifact.test, labels)?;
    fs::write(out_dir.join("eval_report.json"), report.to_json())?;
    fs::write(out_dir.join("eval_report.txt"), report.to_text())?;
    fs::write(out_dir.join("confusion.csv"), report.confusion.to_csv(labels))?;
    fs::write(out_dir.join("config.resolved.toml"), resolved.to_toml())?;
    Ok(RunOutcome {
        train_accuracy: log.final_train_accuracy().unwrap_or(f64::NAN),
        test_accuracy: report.accuracy,
        epochs_run: log.epochs.len(),
    })
}

/// `<out>/...` paths used by evaluate when asked to write files.
pub fn write_report_files(
    dir: &Path,
    report: &qnids_core::metrics::EvaluationReport,
    labels: &[String],
) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("eval_report.json"), report.to_json())?;
    fs::write(dir.join("eval_report.txt"), report.to_text())?;
    fs::write(dir.join("confusion.csv"), report.confusion.to_csv(labels))?;
    Ok(())
}

pub fn parent_dir_of(path: &Path) -> Option<PathBuf> {
    path.parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
}
