//! Describe a binary artifact: model weights or dataset container.

use super::CliError;
use qnids_core::data::DatasetArtifact;
use qnids_core::nn::{infer_shapes, LayerShape, Network};
use std::fs::File;
use std::io::Read;
use std::path::Path;

pub fn run(path: &Path) -> Result<(), CliError> {
    if !path.exists() {
        return Err(CliError::Usage(format!("{} not found", path.display())));
    }
    let mut magic = [0u8; 4];
    File::open(path)?
        .read_exact(&mut magic)
        .map_err(|_| CliError::Runtime(format!("{} is too short to identify", path.display())))?;
    match &magic {
        b"QNET" => inspect_model(path),
        b"QNDS" => inspect_dataset(path),
        other => Err(CliError::Runtime(format!(
            "{}: unrecognized file (magic {:?})",
            path.display(),
            String::from_utf8_lossy(other)
        ))),
    }
}

fn shape_text(s: &LayerShape) -> String {
    match s {
        LayerShape::Channeled { channels, length } => format!("{channels}x{length}"),
        LayerShape::Flat { length } => format!("{length}"),
    }
}

fn inspect_model(path: &Path) -> Result<(), CliError> {
    let net = Network::load(path)?;
    let spec = net.spec();
    let shapes = infer_shapes(spec).map_err(|e| CliError::Runtime(e.to_string()))?;
    let count = net.param_count();
    println!("model weights: {}", path.display());
    println!(
        "input: {} channel(s) x {} features",
        spec.input_channels, spec.input_length
    );
    println!(
        "{:<4} {:<14} {:>10} {:>10} notes",
        "#", "layer", "output", "params"
    );
    for (i, layer) in spec.layers.iter().enumerate() {
        let frozen = match &net.params().layers[i] {
            Some(p) if !p.trainable => "frozen",
            _ => "",
        };
        println!(
            "{:<4} {:<14} {:>10} {:>10} {}",
            i,
            layer.kind_name(),
            shape_text(&shapes[i]),
            count.per_layer[i],
            frozen
        );
    }
    println!(
        "parameters: {} total, {} trainable",
        count.total, count.trainable
    );
    Ok(())
}

fn inspect_dataset(path: &Path) -> Result<(), CliError> {
    let artifact = DatasetArtifact::load(path)?;
    println!("dataset: {}", path.display());
    println!(
        "features: {} ({} named)",
        artifact.train.n_features(),
        artifact.train.feature_names.len()
    );
    println!("classes: {}", artifact.train.label_names.join(", "));
    for (name, split) in [("train", &artifact.train), ("test", &artifact.test)] {
        let mut counts = vec![0u64; split.label_names.len()];
        for &l in split.labels() {
            counts[l] += 1;
        }
        let breakdown: Vec<String> = split
            .label_names
            .iter()
            .zip(&counts)
            .map(|(n, c)| format!("{n}={c}"))
            .collect();
        println!("{name}: {} rows ({})", split.n_rows(), breakdown.join(", "));
    }
    Ok(())
}
