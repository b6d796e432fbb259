//! Score a saved model against a preprocessed dataset split.

use super::{load_artifact, write_report_files, CliError};
use qnids_core::metrics::evaluate;
use qnids_core::nn::Network;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SplitArg {
    Train,
    Test,
}

pub fn run(
    model: &Path,
    data: &Path,
    split: SplitArg,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if !model.exists() {
        return Err(CliError::Usage(format!(
            "model {} not found",
            model.display()
        )));
    }
    let net = Network::load(model)?;
    let artifact = load_artifact(data)?;
    let ds = match split {
        SplitArg::Train => &artifact.train,
        SplitArg::Test => &artifact.test,
    };
    let report = evaluate(&net, ds, &ds.label_names)?;
    print!("{}", report.to_text());
    if let Some(dir) = out {
        write_report_files(dir, &report, &ds.label_names)?;
        println!("report files in {}", dir.display());
    }
    Ok(())
}
