//! Train a Q-network on a preprocessed dataset.

use super::{load_artifact, load_resolved, run_training, CliError};
use crate::config::Overrides;
use qnids_core::agent::Agent;
use qnids_core::loss::LossKind;
use qnids_core::nn::NetworkSpec;
use std::path::Path;

fn classifier_spec(
    n_features: usize,
    hidden: &[usize],
    classes: usize,
) -> Result<NetworkSpec, CliError> {
    NetworkSpec::conv_classifier(n_features, hidden, classes).map_err(|e| {
        CliError::Usage(format!(
            "cannot build a conv network for {n_features} input features: {e}"
        ))
    })
}

pub fn run(
    config: Option<&Path>,
    out: &Path,
    overrides: &Overrides,
    sweep: bool,
) -> Result<(), CliError> {
    let r = load_resolved(config, out, overrides)?;
    let artifact = load_artifact(&r.dataset_path)?;
    let n_features = artifact.train.n_features();
    let classes = artifact.train.label_names.len();

    if sweep {
        println!(
            "{:<8} {:>6} {:>11} {:>10}",
            "loss", "epochs", "train acc", "test acc"
        );
        for loss in LossKind::ALL {
            let mut per_loss = r.clone();
            per_loss.agent.loss = loss;
            let sub = out.join(format!("loss-{}", loss.name()));
            let spec = classifier_spec(n_features, &per_loss.hidden_dense, classes)?;
            let mut agent = Agent::new(spec, per_loss.agent.clone())?;
            eprintln!("--- {} ---", loss.name());
            let outcome = run_training(&mut agent, &artifact, &sub, &per_loss)?;
            println!(
                "{:<8} {:>6} {:>11.4} {:>10.4}",
                loss.name(),
                outcome.epochs_run,
                outcome.train_accuracy,
                outcome.test_accuracy
            );
        }
        return Ok(());
    }

    let spec = classifier_spec(n_features, &r.hidden_dense, classes)?;
    let mut agent = Agent::new(spec, r.agent.clone())?;
    let outcome = run_training(&mut agent, &artifact, out, &r)?;
    println!(
        "{} with {} loss: {} epochs, train accuracy {:.4}, test accuracy {:.4}",
        r.agent.algorithm,
        r.agent.loss.name(),
        outcome.epochs_run,
        outcome.train_accuracy,
        outcome.test_accuracy
    );
    println!("artifacts in {}", out.display());
    Ok(())
}
