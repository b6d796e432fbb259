//! Forward pass with cached per-layer activations.

use super::{LayerSpec, Network, NnError};
use crate::tensor::NumericArray;

/// Activations recorded during a forward pass: `stages[i]` is the input to
/// layer `i`, `stages.last()` the network output. Backward reads these
/// instead of recomputing.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub(super) stages: Vec<NumericArray>,
}

impl ForwardCache {
    pub fn output(&self) -> &NumericArray {
        self.stages.last().expect("cache always holds the input stage")
    }
}

impl Network {
    /// Runs the network and keeps every intermediate activation for a
    /// subsequent `backward` call.
    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache), NnError> {
        let stages = self.run_stages(input)?;
        let output = stages.last().expect("non-empty").values().to_vec();
        Ok((output, ForwardCache { stages }))
    }

    /// Forward pass without retaining gradient state.
    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>, NnError> {
        let mut stages = self.run_stages(input)?;
        Ok(stages.pop().expect("non-empty").values().to_vec())
    }

    fn run_stages(&self, input: &[f64]) -> Result<Vec<NumericArray>, NnError> {
        let spec = &self.spec;
        let expected = spec.input_channels * spec.input_length;
        if input.len() != expected {
            return Err(NnError::Shape {
                layer: 0,
                kind: "input",
                detail: format!("got {} values, expected {}", input.len(), expected),
            });
        }
        if !input.iter().all(|v| v.is_finite()) {
            return Err(NnError::Numeric("network input".into()));
        }
        let shapes = super::infer_shapes(spec)?;
        let mut stages = Vec::with_capacity(spec.layers.len() + 1);
        stages.push(NumericArray::new(
            vec![spec.input_channels, spec.input_length],
            input.to_vec(),
        ));
        let mut cur_channels = spec.input_channels;
        let mut cur_len = spec.input_length;
        for (i, layer) in spec.layers.iter().enumerate() {
            let x = stages.last().expect("non-empty");
            let out = match *layer {
                LayerSpec::Conv1D {
                    filters,
                    kernel_width,
                } => {
                    let p = self.params.layers[i].as_ref().expect("validated");
                    let out_len = cur_len - kernel_width + 1;
                    let mut out = vec![0.0; filters * out_len];
                    conv1d(
                        p.weights.values(),
                        p.biases.values(),
                        x.values(),
                        cur_channels,
                        cur_len,
                        filters,
                        kernel_width,
                        &mut out,
                    );
                    NumericArray::new(vec![filters, out_len], out)
                }
                LayerSpec::MaxPool1D { width } => {
                    let out_len = cur_len / width;
                    let mut out = vec![0.0; cur_channels * out_len];
                    max_pool1d(x.values(), cur_channels, cur_len, width, &mut out);
                    NumericArray::new(vec![cur_channels, out_len], out)
                }
                LayerSpec::Flatten => NumericArray::new(vec![x.len()], x.values().to_vec()),
                LayerSpec::Dense { units } => {
                    let p = self.params.layers[i].as_ref().expect("validated");
                    let mut out = vec![0.0; units];
                    dense(p.weights.values(), p.biases.values(), x.values(), &mut out);
                    NumericArray::new(vec![units], out)
                }
                LayerSpec::Relu => NumericArray::new(
                    x.shape().to_vec(),
                    x.values().iter().map(|&v| v.max(0.0)).collect(),
                ),
                LayerSpec::SoftmaxOutput { units } => {
                    let p = self.params.layers[i].as_ref().expect("validated");
                    let mut out = vec![0.0; units];
                    dense(p.weights.values(), p.biases.values(), x.values(), &mut out);
                    softmax_in_place(&mut out);
                    NumericArray::new(vec![units], out)
                }
            };
            match &shapes[i] {
                super::LayerShape::Channeled { channels, length } => {
                    cur_channels = *channels;
                    cur_len = *length;
                }
                super::LayerShape::Flat { length } => {
                    cur_channels = 1;
                    cur_len = *length;
                }
            }
            stages.push(out);
        }
        Ok(stages)
    }
}

/// Valid-padding stride-1 correlation: `out[f][i] = b[f] + sum_{c,k} w[f][c][k] * x[c][i+k]`.
#[allow(clippy::too_many_arguments)]
pub(super) fn conv1d(
    w: &[f64],
    b: &[f64],
    x: &[f64],
    channels: usize,
    in_len: usize,
    filters: usize,
    kernel: usize,
    out: &mut [f64],
) {
    let out_len = in_len - kernel + 1;
    for f in 0..filters {
        let out_row = &mut out[f * out_len..(f + 1) * out_len];
        out_row.fill(b[f]);
        let wf = &w[f * channels * kernel..(f + 1) * channels * kernel];
        for c in 0..channels {
            let xr = &x[c * in_len..(c + 1) * in_len];
            for (k, &wv) in wf[c * kernel..(c + 1) * kernel].iter().enumerate() {
                for (o, &xv) in out_row.iter_mut().zip(&xr[k..k + out_len]) {
                    *o += wv * xv;
                }
            }
        }
    }
}

/// Non-overlapping max pooling; a trailing remainder shorter than `width` is
/// dropped (output length is `in_len / width`).
pub(super) fn max_pool1d(x: &[f64], channels: usize, in_len: usize, width: usize, out: &mut [f64]) {
    let out_len = in_len / width;
    for c in 0..channels {
        let xr = &x[c * in_len..(c + 1) * in_len];
        let or = &mut out[c * out_len..(c + 1) * out_len];
        for (i, o) in or.iter_mut().enumerate() {
            let win = &xr[i * width..(i + 1) * width];
            *o = win.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        }
    }
}

pub(super) fn dense(w: &[f64], b: &[f64], x: &[f64], out: &mut [f64]) {
    let n = x.len();
    for (o, (bias, wr)) in out.iter_mut().zip(b.iter().zip(w.chunks_exact(n))) {
        let mut acc = *bias;
        for (wv, xv) in wr.iter().zip(x) {
            acc += wv * xv;
        }
        *o = acc;
    }
}

/// Max-shifted softmax; every output is in (0, 1) and the vector sums to 1.
pub(super) fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}
