//! Static shape inference. Every layer's output shape is derived before any
//! parameter is allocated, so malformed stacks fail with the offending layer
//! named instead of panicking mid-forward.

use super::{LayerSpec, NetworkSpec, NnError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LayerShape {
    Channeled { channels: usize, length: usize },
    Flat { length: usize },
}

impl LayerShape {
    pub fn total(&self) -> usize {
        match self {
            LayerShape::Channeled { channels, length } => channels * length,
            LayerShape::Flat { length } => *length,
        }
    }

    pub fn as_channeled(&self) -> Option<(usize, usize)> {
        match self {
            LayerShape::Channeled { channels, length } => Some((*channels, *length)),
            LayerShape::Flat { .. } => None,
        }
    }
}

/// Output shape of every layer in order. Errors name the first offending
/// layer (zero-based index into `spec.layers`).
pub fn infer_shapes(spec: &NetworkSpec) -> Result<Vec<LayerShape>, NnError> {
    if spec.input_length == 0 || spec.input_channels == 0 {
        return Err(NnError::Shape {
            layer: 0,
            kind: "input",
            detail: format!(
                "input shape [{}, {}] must be non-empty",
                spec.input_channels, spec.input_length
            ),
        });
    }
    let mut cur = LayerShape::Channeled {
        channels: spec.input_channels,
        length: spec.input_length,
    };
    let mut out = Vec::with_capacity(spec.layers.len());
    for (i, layer) in spec.layers.iter().enumerate() {
        let err = |detail: String| NnError::Shape {
            layer: i,
            kind: layer.kind_name(),
            detail,
        };
        if matches!(spec.layers.get(i.wrapping_sub(1)), Some(LayerSpec::SoftmaxOutput { .. })) {
            return Err(err("softmax output must be the final layer".into()));
        }
        cur = match *layer {
            LayerSpec::Conv1D {
                filters,
                kernel_width,
            } => {
                if filters == 0 || kernel_width == 0 {
                    return Err(err("filters and kernel width must be positive".into()));
                }
                let (_, length) = cur
                    .as_channeled()
                    .ok_or_else(|| err("requires channeled input (before Flatten)".into()))?;
                if length < kernel_width {
                    return Err(err(format!(
                        "kernel width {kernel_width} exceeds input length {length}"
                    )));
                }
                LayerShape::Channeled {
                    channels: filters,
                    length: length - kernel_width + 1,
                }
            }
            LayerSpec::MaxPool1D { width } => {
                if width == 0 {
                    return Err(err("pool width must be positive".into()));
                }
                let (channels, length) = cur
                    .as_channeled()
                    .ok_or_else(|| err("requires channeled input (before Flatten)".into()))?;
                if length < width {
                    return Err(err(format!(
                        "pool width {width} exceeds input length {length}"
                    )));
                }
                LayerShape::Channeled {
                    channels,
                    length: length / width,
                }
            }
            LayerSpec::Flatten => {
                let (channels, length) = cur
                    .as_channeled()
                    .ok_or_else(|| err("input is already flat".into()))?;
                LayerShape::Flat {
                    length: channels * length,
                }
            }
            LayerSpec::Dense { units } | LayerSpec::SoftmaxOutput { units } => {
                if units == 0 {
                    return Err(err("unit count must be positive".into()));
                }
                match cur {
                    LayerShape::Flat { .. } => LayerShape::Flat { length: units },
                    LayerShape::Channeled { .. } => {
                        return Err(err("requires flattened input".into()))
                    }
                }
            }
            LayerSpec::Relu => cur,
        };
        out.push(cur.clone());
    }
    Ok(out)
}
