//! Raw CSV (or synthetic generation) to a preprocessed dataset artifact.

use super::{load_resolved, parent_dir_of, CliError};
use crate::config::{Overrides, Profile};
use qnids_core::data::{
    clean, fit_and_encode, generate_split, load_csv, split_table, DatasetArtifact, SyntheticSpec,
};
use std::fs;
use std::path::Path;

pub fn run(config: Option<&Path>, out: &Path, overrides: &Overrides) -> Result<(), CliError> {
    let r = load_resolved(config, out, overrides)?;
    fs::create_dir_all(&r.out_dir)?;

    let artifact = match r.profile {
        Profile::Synthetic => {
            let spec = SyntheticSpec {
                samples: r.synthetic.samples,
                features: r.synthetic.features,
                classes: r.synthetic.classes,
                separation: r.synthetic.separation,
                seed: r.seed,
            };
            let (train, test) = generate_split(&spec, r.split_fraction, r.split_seed)
                .map_err(|e| CliError::Usage(format!("synthetic data: {e}")))?;
            println!(
                "generated {} samples ({} features, {} classes, separation {})",
                spec.samples, spec.features, spec.classes, spec.separation
            );
            DatasetArtifact::new(train, test)
        }
        Profile::UnswNb15 | Profile::BotIot => {
            let raw = r.raw_csv.as_ref().ok_or_else(|| {
                CliError::Usage(format!(
                    "profile {} needs data.raw_csv in the config",
                    r.profile.name()
                ))
            })?;
            if !raw.exists() {
                return Err(CliError::Usage(format!(
                    "raw csv {} not found",
                    raw.display()
                )));
            }
            let table = load_csv(raw, &r.schema)
                .map_err(|e| CliError::Runtime(format!("loading {}: {e}", raw.display())))?;
            let (cleaned, report) = clean(&table);
            fs::write(r.out_dir.join("cleaning_report.json"), report.to_json())?;
            fs::write(r.out_dir.join("cleaning_report.txt"), report.to_string())?;
            print!("{report}");
            if cleaned.num_rows() == 0 {
                return Err(CliError::Runtime(
                    "no rows survived cleaning; check the schema and input file".into(),
                ));
            }
            let (train_table, test_table, _) =
                split_table(&cleaned, r.split_fraction, r.split_seed)
                    .map_err(|e| CliError::Runtime(format!("split: {e}")))?;
            let (train, test, _) = fit_and_encode(&train_table, &test_table)
                .map_err(|e| CliError::Runtime(format!("encode: {e}")))?;
            DatasetArtifact::new(train, test)
        }
    };

    if let Some(parent) = parent_dir_of(&r.dataset_path) {
        fs::create_dir_all(parent)?;
    }
    artifact.save(&r.dataset_path)?;
    println!(
        "wrote {} ({} train rows, {} test rows, {} features, {} classes)",
        r.dataset_path.display(),
        artifact.train.n_rows(),
        artifact.test.n_rows(),
        artifact.train.n_features(),
        artifact.train.label_names.len()
    );
    Ok(())
}
