//! Grafting a trained convolutional front end onto a fresh head.
//!
//! Convolution and pooling parameters do not depend on the input length,
//! so the feature extractor learned on one dataset can front a network
//! for another dataset with a different feature count. The copied layers
//! are frozen; only the new dense head trains.

use crate::nn::{LayerSpec, Network, NetworkSpec, NnError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransferError {
    #[error("source network has no flatten layer to graft behind")]
    NoFlatten,
    #[error("source network has no parameterized layers before flatten")]
    NothingToTransfer,
    #[error(transparent)]
    Nn(#[from] NnError),
}

/// How to rebuild the trainable head behind the copied front end.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferPlan {
    /// Hidden dense widths between flatten and the output layer.
    pub head_hidden: Vec<usize>,
    pub target_classes: usize,
    /// Seed for the fresh head parameters.
    pub head_seed: u64,
}

impl TransferPlan {
    pub fn new(target_classes: usize, head_seed: u64) -> Self {
        Self {
            head_hidden: vec![5, 5],
            target_classes,
            head_seed,
        }
    }
}

/// Builds a network for `target_input_length` that reuses the source's
/// layers up to and including its first flatten, frozen, and appends a
/// freshly initialized trainable head.
pub fn build_transfer_net(
    source: &Network,
    target_input_length: usize,
    plan: &TransferPlan,
) -> Result<Network, TransferError> {
    let source_spec = source.spec();
    let flatten_pos = source_spec
        .layers
        .iter()
        .position(|l| matches!(l, LayerSpec::Flatten))
        .ok_or(TransferError::NoFlatten)?;
    let copied = &source_spec.layers[..=flatten_pos];
    if !copied.iter().any(LayerSpec::has_params) {
        return Err(TransferError::NothingToTransfer);
    }

    let mut layers: Vec<LayerSpec> = copied.to_vec();
    for &units in &plan.head_hidden {
        layers.push(LayerSpec::Dense { units });
        layers.push(LayerSpec::Relu);
    }
    layers.push(LayerSpec::SoftmaxOutput {
        units: plan.target_classes,
    });
    let spec = NetworkSpec {
        input_length: target_input_length,
        input_channels: source_spec.input_channels,
        layers,
    };

    // Fresh head everywhere first, then overwrite the copied prefix with
    // the source parameters, frozen.
    let mut net = Network::init(spec, plan.head_seed)?;
    let (spec, mut params) = net.into_parts();
    for i in 0..=flatten_pos {
        if let Some(src) = &source.params().layers[i] {
            let mut copied = src.clone();
            copied.trainable = false;
            params.layers[i] = Some(copied);
        }
    }
    net = Network::from_parts(spec, params)?;
    Ok(net)
}
