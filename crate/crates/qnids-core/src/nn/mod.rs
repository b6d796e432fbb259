//! 1-D convolutional Q-networks: specs, parameters, forward/backward, Adam,
//! and a versioned on-disk weight format.
//!
//! Activations flow as `[channels, length]` until a `Flatten` layer, then as
//! flat vectors. All arithmetic is f64 and fully deterministic for a given
//! seed, so two runs with the same inputs produce bitwise-identical weights.

mod adam;
mod backward;
mod forward;
mod init;
pub mod io;
mod shape;

pub use adam::{adam_step, AdamState};
pub use backward::{Gradients, LayerGrad};
pub use forward::ForwardCache;
pub use io::WeightFileError;
pub use shape::{infer_shapes, LayerShape};

use crate::tensor::NumericArray;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("layer {layer} ({kind}): {detail}")]
    Shape {
        layer: usize,
        kind: &'static str,
        detail: String,
    },
    #[error("non-finite value in {0}")]
    Numeric(String),
}

/// One layer of a network. `Conv1D` uses valid padding and stride 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerSpec {
    Conv1D { filters: usize, kernel_width: usize },
    MaxPool1D { width: usize },
    Flatten,
    Dense { units: usize },
    Relu,
    /// Dense layer followed by a softmax over `units` outputs. Only valid as
    /// the final layer.
    SoftmaxOutput { units: usize },
}

impl LayerSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            LayerSpec::Conv1D { .. } => "Conv1D",
            LayerSpec::MaxPool1D { .. } => "MaxPool1D",
            LayerSpec::Flatten => "Flatten",
            LayerSpec::Dense { .. } => "Dense",
            LayerSpec::Relu => "ReLU",
            LayerSpec::SoftmaxOutput { .. } => "SoftmaxOutput",
        }
    }

    pub fn has_params(&self) -> bool {
        matches!(
            self,
            LayerSpec::Conv1D { .. } | LayerSpec::Dense { .. } | LayerSpec::SoftmaxOutput { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSpec {
    pub input_length: usize,
    pub input_channels: usize,
    pub layers: Vec<LayerSpec>,
}

impl NetworkSpec {
    pub fn new(input_length: usize, layers: Vec<LayerSpec>) -> Self {
        Self {
            input_length,
            input_channels: 1,
            layers,
        }
    }

    /// Standard topology used throughout: three conv blocks (16, 32, 64
    /// filters of width 2) with pooling, then a dense stack and a softmax
    /// head. `hidden` lists the dense widths between Flatten and the head.
    /// Requires `input_length >= 8`.
    pub fn conv_classifier(
        input_length: usize,
        hidden: &[usize],
        classes: usize,
    ) -> Result<Self, NnError> {
        let mut layers = vec![
            LayerSpec::Conv1D {
                filters: 16,
                kernel_width: 2,
            },
            LayerSpec::Relu,
            LayerSpec::Conv1D {
                filters: 32,
                kernel_width: 2,
            },
            LayerSpec::Relu,
            LayerSpec::MaxPool1D { width: 2 },
            LayerSpec::Conv1D {
                filters: 64,
                kernel_width: 2,
            },
            LayerSpec::Relu,
            LayerSpec::MaxPool1D { width: 2 },
            LayerSpec::Flatten,
        ];
        for &h in hidden {
            layers.push(LayerSpec::Dense { units: h });
            layers.push(LayerSpec::Relu);
        }
        layers.push(LayerSpec::SoftmaxOutput { units: classes });
        let spec = Self::new(input_length, layers);
        infer_shapes(&spec)?;
        Ok(spec)
    }

    /// Width of the final layer's output.
    pub fn output_len(&self) -> Result<usize, NnError> {
        let shapes = infer_shapes(self)?;
        Ok(shapes.last().map(|s| s.total()).unwrap_or(0))
    }
}

/// Weights and biases for one parameterized layer. Frozen layers
/// (`trainable == false`) receive no gradients and no optimizer updates.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub weights: NumericArray,
    pub biases: NumericArray,
    pub trainable: bool,
}

/// Per-layer parameters aligned 1:1 with a `NetworkSpec`'s layers; `None` for
/// layers without parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub layers: Vec<Option<LayerParams>>,
}

impl NetworkParams {
    /// Bitwise equality of every tensor, including trainable flags.
    pub fn bits_eq(&self, other: &Self) -> bool {
        self.layers.len() == other.layers.len()
            && self.layers.iter().zip(&other.layers).all(|(a, b)| match (a, b) {
                (None, None) => true,
                (Some(a), Some(b)) => {
                    a.trainable == b.trainable
                        && a.weights.bits_eq(&b.weights)
                        && a.biases.bits_eq(&b.biases)
                }
                _ => false,
            })
    }
}

/// Deep copy of parameters, used to refresh a target network.
pub fn sync_target(current: &NetworkParams) -> NetworkParams {
    current.clone()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamCount {
    pub per_layer: Vec<usize>,
    pub total: usize,
    pub trainable: usize,
}

/// A spec paired with matching parameters.
#[derive(Debug, Clone)]
pub struct Network {
    spec: NetworkSpec,
    params: NetworkParams,
}

impl Network {
    /// Fresh parameters from `seed`: uniform He-scaled weights for layers
    /// feeding ReLU, Glorot-scaled for the softmax head, zero biases.
    pub fn init(spec: NetworkSpec, seed: u64) -> Result<Self, NnError> {
        let params = init::init_params(&spec, seed)?;
        Ok(Self { spec, params })
    }

    /// Bundles an existing spec and parameters, validating that every tensor
    /// has the shape the spec implies.
    pub fn from_parts(spec: NetworkSpec, params: NetworkParams) -> Result<Self, NnError> {
        validate_params(&spec, &params)?;
        Ok(Self { spec, params })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn params(&self) -> &NetworkParams {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut NetworkParams {
        &mut self.params
    }

    pub fn into_parts(self) -> (NetworkSpec, NetworkParams) {
        (self.spec, self.params)
    }

    pub fn param_count(&self) -> ParamCount {
        let mut per_layer = Vec::with_capacity(self.spec.layers.len());
        let mut total = 0;
        let mut trainable = 0;
        for lp in &self.params.layers {
            let n = lp
                .as_ref()
                .map(|p| p.weights.len() + p.biases.len())
                .unwrap_or(0);
            per_layer.push(n);
            total += n;
            if lp.as_ref().map(|p| p.trainable).unwrap_or(false) {
                trainable += n;
            }
        }
        ParamCount {
            per_layer,
            total,
            trainable,
        }
    }
}

/// Per-layer (weights, biases) shape pair; `None` for parameterless layers.
pub(crate) type ParamShapes = Vec<Option<(Vec<usize>, Vec<usize>)>>;

/// Expected (weights, biases) shapes for each parameterized layer.
pub(crate) fn expected_param_shapes(spec: &NetworkSpec) -> Result<ParamShapes, NnError> {
    let shapes = infer_shapes(spec)?;
    let mut out = Vec::with_capacity(spec.layers.len());
    for (i, layer) in spec.layers.iter().enumerate() {
        let input = if i == 0 {
            LayerShape::Channeled {
                channels: spec.input_channels,
                length: spec.input_length,
            }
        } else {
            shapes[i - 1].clone()
        };
        out.push(match layer {
            LayerSpec::Conv1D {
                filters,
                kernel_width,
            } => {
                let (c, _) = input.as_channeled().expect("validated by infer_shapes");
                Some((vec![*filters, c, *kernel_width], vec![*filters]))
            }
            LayerSpec::Dense { units } | LayerSpec::SoftmaxOutput { units } => {
                let n = input.total();
                Some((vec![*units, n], vec![*units]))
            }
            _ => None,
        });
    }
    Ok(out)
}

fn validate_params(spec: &NetworkSpec, params: &NetworkParams) -> Result<(), NnError> {
    let expected = expected_param_shapes(spec)?;
    if params.layers.len() != spec.layers.len() {
        return Err(NnError::Shape {
            layer: 0,
            kind: "params",
            detail: format!(
                "{} parameter entries for {} layers",
                params.layers.len(),
                spec.layers.len()
            ),
        });
    }
    for (i, (exp, got)) in expected.iter().zip(&params.layers).enumerate() {
        let kind = spec.layers[i].kind_name();
        match (exp, got) {
            (None, None) => {}
            (Some((w, b)), Some(p)) => {
                if p.weights.shape() != w.as_slice() || p.biases.shape() != b.as_slice() {
                    return Err(NnError::Shape {
                        layer: i,
                        kind,
                        detail: format!(
                            "parameter shapes {:?}/{:?} do not match expected {:?}/{:?}",
                            p.weights.shape(),
                            p.biases.shape(),
                            w,
                            b
                        ),
                    });
                }
                if !p.weights.all_finite() || !p.biases.all_finite() {
                    return Err(NnError::Numeric(format!("parameters of layer {i}")));
                }
            }
            (None, Some(_)) => {
                return Err(NnError::Shape {
                    layer: i,
                    kind,
                    detail: "unexpected parameters for a parameter-free layer".into(),
                })
            }
            (Some(_), None) => {
                return Err(NnError::Shape {
                    layer: i,
                    kind,
                    detail: "missing parameters".into(),
                })
            }
        }
    }
    Ok(())
}
