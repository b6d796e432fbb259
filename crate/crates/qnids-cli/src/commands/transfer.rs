//! Retrain a saved model's head on a new dataset, keeping its
//! convolutional front end frozen.

use super::{load_artifact, load_resolved, run_training, CliError};
use crate::config::Overrides;
use qnids_core::agent::Agent;
use qnids_core::nn::Network;
use qnids_core::transfer::{build_transfer_net, TransferPlan};
use std::path::Path;

pub fn run(
    config: Option<&Path>,
    out: &Path,
    overrides: &Overrides,
    source: &Path,
) -> Result<(), CliError> {
    let r = load_resolved(config, out, overrides)?;
    if !source.exists() {
        return Err(CliError::Usage(format!(
            "source model {} not found",
            source.display()
        )));
    }
    let source_net = Network::load(source)?;
    let artifact = load_artifact(&r.dataset_path)?;
    let n_features = artifact.train.n_features();
    let classes = artifact.train.label_names.len();

    let plan = TransferPlan {
        head_hidden: r.head_hidden.clone(),
        target_classes: classes,
        head_seed: r.seed,
    };
    let net = build_transfer_net(&source_net, n_features, &plan)
        .map_err(|e| CliError::Usage(format!("transfer from {}: {e}", source.display())))?;
    let count = net.param_count();
    println!(
        "transfer network: {} parameters, {} trainable, {} frozen",
        count.total,
        count.trainable,
        count.total - count.trainable
    );

    let mut agent = Agent::from_network(net, r.agent.clone())?;
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
