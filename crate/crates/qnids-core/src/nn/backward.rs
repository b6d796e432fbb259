//! Reverse-mode gradients. The chain rule runs through every layer; weight
//! gradients are emitted only for trainable layers.

use super::{ForwardCache, LayerSpec, Network, NnError};
use crate::tensor::NumericArray;

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weights: NumericArray,
    pub biases: NumericArray,
}

/// Parameter gradients aligned with `NetworkParams.layers`; `None` for
/// parameter-free and frozen layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Option<LayerGrad>>,
}

impl Gradients {
    /// Element-wise accumulation; shapes must match.
    pub fn add_assign(&mut self, other: &Gradients) {
        assert_eq!(self.layers.len(), other.layers.len(), "gradient layouts differ");
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            match (a, b) {
                (Some(a), Some(b)) => {
                    for (x, y) in a.weights.values_mut().iter_mut().zip(b.weights.values()) {
                        *x += y;
                    }
                    for (x, y) in a.biases.values_mut().iter_mut().zip(b.biases.values()) {
                        *x += y;
                    }
                }
                (None, None) => {}
                _ => panic!("gradient layouts differ"),
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for g in self.layers.iter_mut().flatten() {
            for v in g.weights.values_mut() {
                *v *= factor;
            }
            for v in g.biases.values_mut() {
                *v *= factor;
            }
        }
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .flatten()
            .all(|g| g.weights.all_finite() && g.biases.all_finite())
    }
}

impl Network {
    /// Gradients of a scalar loss with respect to every trainable parameter,
    /// given `output_grad` = dLoss/dOutput for the forward pass recorded in
    /// `cache`.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        output_grad: &[f64],
    ) -> Result<Gradients, NnError> {
        let spec = &self.spec;
        let stages = &cache.stages;
        assert_eq!(
            stages.len(),
            spec.layers.len() + 1,
            "cache does not match network depth"
        );
        let out = stages.last().expect("non-empty");
        if output_grad.len() != out.len() {
            return Err(NnError::Shape {
                layer: spec.layers.len().saturating_sub(1),
                kind: "output_grad",
                detail: format!("got {} values, expected {}", output_grad.len(), out.len()),
            });
        }
        if !output_grad.iter().all(|v| v.is_finite()) {
            return Err(NnError::Numeric("output gradient".into()));
        }

        let mut grads: Vec<Option<LayerGrad>> = vec![None; spec.layers.len()];
        let mut d = output_grad.to_vec();
        for (i, layer) in spec.layers.iter().enumerate().rev() {
            let x = &stages[i];
            let y = &stages[i + 1];
            match *layer {
                LayerSpec::Conv1D {
                    filters,
                    kernel_width,
                } => {
                    let p = self.params.layers[i].as_ref().expect("validated");
                    let channels = x.shape()[0];
                    let in_len = x.shape()[1];
                    let out_len = in_len - kernel_width + 1;
                    let mut dx = vec![0.0; x.len()];
                    let mut dw = p.trainable.then(|| vec![0.0; p.weights.len()]);
                    let mut db = p.trainable.then(|| vec![0.0; filters]);
                    let w = p.weights.values();
                    let xv = x.values();
                    for f in 0..filters {
                        let dy = &d[f * out_len..(f + 1) * out_len];
                        if let Some(db) = db.as_deref_mut() {
                            db[f] = dy.iter().sum();
                        }
                        let wf = &w[f * channels * kernel_width..(f + 1) * channels * kernel_width];
                        for c in 0..channels {
                            let xr = &xv[c * in_len..(c + 1) * in_len];
                            let dxr = &mut dx[c * in_len..(c + 1) * in_len];
                            for k in 0..kernel_width {
                                if let Some(dw) = dw.as_deref_mut() {
                                    let mut acc = 0.0;
                                    for (dyv, xvv) in dy.iter().zip(&xr[k..k + out_len]) {
                                        acc += dyv * xvv;
                                    }
                                    dw[(f * channels + c) * kernel_width + k] = acc;
                                }
                                let wv = wf[c * kernel_width + k];
                                for (dxv, dyv) in dxr[k..k + out_len].iter_mut().zip(dy) {
                                    *dxv += wv * dyv;
                                }
                            }
                        }
                    }
                    if let (Some(dw), Some(db)) = (dw, db) {
                        grads[i] = Some(LayerGrad {
                            weights: NumericArray::new(p.weights.shape().to_vec(), dw),
                            biases: NumericArray::new(vec![filters], db),
                        });
                    }
                    d = dx;
                }
                LayerSpec::MaxPool1D { width } => {
                    let channels = x.shape()[0];
                    let in_len = x.shape()[1];
                    let out_len = in_len / width;
                    let mut dx = vec![0.0; x.len()];
                    let xv = x.values();
                    for c in 0..channels {
                        let xr = &xv[c * in_len..(c + 1) * in_len];
                        for i_out in 0..out_len {
                            let win = &xr[i_out * width..(i_out + 1) * width];
                            // Ties route to the first maximum.
                            let mut best = 0;
                            for (j, &v) in win.iter().enumerate() {
                                if v > win[best] {
                                    best = j;
                                }
                            }
                            dx[c * in_len + i_out * width + best] += d[c * out_len + i_out];
                        }
                    }
                    d = dx;
                }
                LayerSpec::Flatten => {
                    // Same values, channeled shape upstream.
                }
                LayerSpec::Dense { .. } => {
                    let p = self.params.layers[i].as_ref().expect("validated");
                    d = dense_backward(p, x.values(), &d, &mut grads[i]);
                }
                LayerSpec::Relu => {
                    for (dv, &xv) in d.iter_mut().zip(x.values()) {
                        if xv <= 0.0 {
                            *dv = 0.0;
                        }
                    }
                }
                LayerSpec::SoftmaxOutput { .. } => {
                    let p = self.params.layers[i].as_ref().expect("validated");
                    // d/dz of softmax(z): dz_j = y_j * (dy_j - sum_k dy_k y_k).
                    let yv = y.values();
                    let dot: f64 = d.iter().zip(yv).map(|(a, b)| a * b).sum();
                    let dz: Vec<f64> = d.iter().zip(yv).map(|(dy, y)| y * (dy - dot)).collect();
                    d = dense_backward(p, x.values(), &dz, &mut grads[i]);
                }
            }
        }
        Ok(Gradients { layers: grads })
    }
}

/// Shared by Dense and the softmax head (after the softmax Jacobian has been
/// applied). Returns dLoss/dInput and fills `slot` when the layer trains.
fn dense_backward(
    p: &super::LayerParams,
    x: &[f64],
    dy: &[f64],
    slot: &mut Option<LayerGrad>,
) -> Vec<f64> {
    let n = x.len();
    let w = p.weights.values();
    let mut dx = vec![0.0; n];
    if p.trainable {
        let mut dw = vec![0.0; w.len()];
        for (o, &dyv) in dy.iter().enumerate() {
            let wr = &w[o * n..(o + 1) * n];
            let dwr = &mut dw[o * n..(o + 1) * n];
            for ((dwv, &xv), (&wv, dxv)) in
                dwr.iter_mut().zip(x).zip(wr.iter().zip(dx.iter_mut()))
            {
                *dwv = dyv * xv;
                *dxv += wv * dyv;
            }
        }
        *slot = Some(LayerGrad {
            weights: NumericArray::new(p.weights.shape().to_vec(), dw),
            biases: NumericArray::new(vec![dy.len()], dy.to_vec()),
        });
    } else {
        for (o, &dyv) in dy.iter().enumerate() {
            for (&wv, dxv) in w[o * n..(o + 1) * n].iter().zip(dx.iter_mut()) {
                *dxv += wv * dyv;
            }
        }
    }
    dx
}

#[cfg(test)]
mod tests {
    use super::super::{LayerSpec, Network, NetworkSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    /// Loss used for checks: L = sum_i c_i * out_i with fixed coefficients,
    /// so dL/dout = c.
    fn linear_loss(out: &[f64], c: &[f64]) -> f64 {
        out.iter().zip(c).map(|(a, b)| a * b).sum()
    }

    fn numeric_grads(net: &mut Network, x: &[f64], c: &[f64]) -> Vec<Vec<(Vec<f64>, Vec<f64>)>> {
        // Central differences over every parameter, h = 1e-5.
        let h = 1e-5;
        let n_layers = net.params().layers.len();
        let mut all = Vec::new();
        for li in 0..n_layers {
            let mut layer_grads = Vec::new();
            if net.params().layers[li].is_some() {
                let (wn, bn) = {
                    let p = net.params().layers[li].as_ref().unwrap();
                    (p.weights.len(), p.biases.len())
                };
                let mut gw = vec![0.0; wn];
                let mut gb = vec![0.0; bn];
                for (j, slot) in gw.iter_mut().enumerate() {
                    let orig = net.params().layers[li].as_ref().unwrap().weights.values()[j];
                    net.params_mut().layers[li].as_mut().unwrap().weights.values_mut()[j] =
                        orig + h;
                    let up = linear_loss(&net.predict(x).unwrap(), c);
                    net.params_mut().layers[li].as_mut().unwrap().weights.values_mut()[j] =
                        orig - h;
                    let down = linear_loss(&net.predict(x).unwrap(), c);
                    net.params_mut().layers[li].as_mut().unwrap().weights.values_mut()[j] = orig;
                    *slot = (up - down) / (2.0 * h);
                }
                for (j, slot) in gb.iter_mut().enumerate() {
                    let orig = net.params().layers[li].as_ref().unwrap().biases.values()[j];
                    net.params_mut().layers[li].as_mut().unwrap().biases.values_mut()[j] =
                        orig + h;
                    let up = linear_loss(&net.predict(x).unwrap(), c);
                    net.params_mut().layers[li].as_mut().unwrap().biases.values_mut()[j] =
                        orig - h;
                    let down = linear_loss(&net.predict(x).unwrap(), c);
                    net.params_mut().layers[li].as_mut().unwrap().biases.values_mut()[j] = orig;
                    *slot = (up - down) / (2.0 * h);
                }
                layer_grads.push((gw, gb));
            }
            all.push(layer_grads);
        }
        all
    }

    fn assert_close(analytic: f64, numeric: f64) {
        let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
        assert!(
            rel < 1e-4,
            "analytic {analytic} vs numeric {numeric} (rel {rel})"
        );
    }

    #[test]
    fn backward_matches_central_differences() {
        let spec = NetworkSpec::new(
            6,
            vec![
                LayerSpec::Conv1D {
                    filters: 3,
                    kernel_width: 2,
                },
                LayerSpec::Relu,
                LayerSpec::MaxPool1D { width: 2 },
                LayerSpec::Flatten,
                LayerSpec::Dense { units: 4 },
                LayerSpec::Relu,
                LayerSpec::SoftmaxOutput { units: 3 },
            ],
        );
        let mut net = Network::init(spec, 99).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let (_, cache) = net.forward(&x).unwrap();
        let grads = net.backward(&cache, &c).unwrap();
        let numeric = numeric_grads(&mut net, &x, &c);

        for (li, num) in numeric.iter().enumerate() {
            if let Some((gw, gb)) = num.first() {
                let g = grads.layers[li].as_ref().expect("trainable layer has grads");
                for (a, n) in g.weights.values().iter().zip(gw) {
                    assert_close(*a, *n);
                }
                for (a, n) in g.biases.values().iter().zip(gb) {
                    assert_close(*a, *n);
                }
            }
        }
    }

    #[test]
    fn zero_output_grad_gives_zero_grads() {
        let spec = NetworkSpec::conv_classifier(8, &[4], 3).unwrap();
        let net = Network::init(spec, 1).unwrap();
        let (_, cache) = net
            .forward(&[0.5, 0.2, 0.8, 0.1, 0.9, 0.3, 0.7, 0.4])
            .unwrap();
        let grads = net.backward(&cache, &[0.0, 0.0, 0.0]).unwrap();
        for g in grads.layers.iter().flatten() {
            assert!(g.weights.values().iter().all(|&v| v == 0.0));
            assert!(g.biases.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn frozen_layer_gets_no_gradient_entry() {
        let spec = NetworkSpec::conv_classifier(8, &[4], 3).unwrap();
        let mut net = Network::init(spec, 1).unwrap();
        net.params_mut().layers[0].as_mut().unwrap().trainable = false;
        let (_, cache) = net
            .forward(&[0.5, 0.2, 0.8, 0.1, 0.9, 0.3, 0.7, 0.4])
            .unwrap();
        let grads = net.backward(&cache, &[0.5, -0.2, 0.1]).unwrap();
        assert!(grads.layers[0].is_none());
        assert!(grads.layers[2].is_some());
    }

    #[test]
    fn output_grad_length_is_checked() {
        let spec = NetworkSpec::new(3, vec![LayerSpec::Relu]);
        let net = Network::init(spec, 0).unwrap();
        let (_, cache) = net.forward(&[1.0, 2.0, 3.0]).unwrap();
        assert!(net.backward(&cache, &[1.0]).is_err());
    }
}
