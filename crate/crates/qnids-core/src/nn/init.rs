//! Seeded parameter initialization.

use super::{expected_param_shapes, LayerParams, LayerSpec, NetworkParams, NetworkSpec, NnError};
use crate::tensor::NumericArray;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Draws weights layer by layer from a ChaCha20 stream seeded with `seed`:
/// uniform in ±sqrt(6/fan_in) for conv and dense layers (which feed ReLU),
/// uniform in ±sqrt(6/(fan_in+fan_out)) for the softmax head, zero biases.
/// Identical seeds give bitwise-identical parameters on every platform.
pub fn init_params(spec: &NetworkSpec, seed: u64) -> Result<NetworkParams, NnError> {
    let shapes = expected_param_shapes(spec)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut layers = Vec::with_capacity(spec.layers.len());
    for (layer, sh) in spec.layers.iter().zip(shapes) {
        let Some((w_shape, b_shape)) = sh else {
            layers.push(None);
            continue;
        };
        let limit = match layer {
            LayerSpec::Conv1D { .. } | LayerSpec::Dense { .. } => {
                let fan_in: usize = w_shape[1..].iter().product();
                (6.0 / fan_in as f64).sqrt()
            }
            LayerSpec::SoftmaxOutput { .. } => {
                let fan_out = w_shape[0];
                let fan_in = w_shape[1];
                (6.0 / (fan_in + fan_out) as f64).sqrt()
            }
            _ => unreachable!("only parameterized layers reach here"),
        };
        let n: usize = w_shape.iter().product();
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-limit..limit)).collect();
        layers.push(Some(LayerParams {
            weights: NumericArray::new(w_shape, values),
            biases: NumericArray::zeros(b_shape),
            trainable: true,
        }));
    }
    Ok(NetworkParams { layers })
}
