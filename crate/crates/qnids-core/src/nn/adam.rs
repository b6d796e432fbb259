//! Bias-corrected Adam over trainable parameters.

use super::{Gradients, NetworkParams, NnError};

#[derive(Debug, Clone)]
struct Slot {
    m_w: Vec<f64>,
    v_w: Vec<f64>,
    m_b: Vec<f64>,
    v_b: Vec<f64>,
}

/// First/second-moment accumulators, one slot per trainable layer, plus the
/// shared step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    step_count: u64,
    slots: Vec<Option<Slot>>,
}

impl AdamState {
    pub fn new(params: &NetworkParams) -> Self {
        Self::with_hyper(params, 0.9, 0.999, 1e-8)
    }

    pub fn with_hyper(params: &NetworkParams, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        let slots = params
            .layers
            .iter()
            .map(|lp| {
                lp.as_ref().filter(|p| p.trainable).map(|p| Slot {
                    m_w: vec![0.0; p.weights.len()],
                    v_w: vec![0.0; p.weights.len()],
                    m_b: vec![0.0; p.biases.len()],
                    v_b: vec![0.0; p.biases.len()],
                })
            })
            .collect();
        Self {
            beta1,
            beta2,
            epsilon,
            step_count: 0,
            slots,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }
}

/// One Adam update. Frozen layers are left bitwise untouched; gradients
/// supplied for them are ignored. A missing gradient for a trainable layer
/// counts as zero (moments still decay).
pub fn adam_step(
    params: &mut NetworkParams,
    grads: &Gradients,
    state: &mut AdamState,
    learning_rate: f64,
) -> Result<(), NnError> {
    if !(learning_rate.is_finite() && learning_rate > 0.0) {
        return Err(NnError::Numeric(format!("learning rate {learning_rate}")));
    }
    if grads.layers.len() != params.layers.len() || state.slots.len() != params.layers.len() {
        return Err(NnError::Shape {
            layer: 0,
            kind: "adam",
            detail: "gradient/state layout does not match parameters".into(),
        });
    }
    if !grads.all_finite() {
        return Err(NnError::Numeric("gradients".into()));
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);

    for (li, slot) in state.slots.iter_mut().enumerate() {
        let Some(slot) = slot else { continue };
        let p = params.layers[li]
            .as_mut()
            .expect("slot exists only for parameterized layers");
        if !p.trainable {
            continue;
        }
        let zero_w;
        let zero_b;
        let (gw, gb) = match grads.layers[li].as_ref() {
            Some(g) => (g.weights.values(), g.biases.values()),
            None => {
                zero_w = vec![0.0; p.weights.len()];
                zero_b = vec![0.0; p.biases.len()];
                (zero_w.as_slice(), zero_b.as_slice())
            }
        };
        update(
            p.weights.values_mut(),
            gw,
            &mut slot.m_w,
            &mut slot.v_w,
            state.beta1,
            state.beta2,
            state.epsilon,
            bc1,
            bc2,
            learning_rate,
        );
        update(
            p.biases.values_mut(),
            gb,
            &mut slot.m_b,
            &mut slot.v_b,
            state.beta1,
            state.beta2,
            state.epsilon,
            bc1,
            bc2,
            learning_rate,
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn update(
    theta: &mut [f64],
    g: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    bc1: f64,
    bc2: f64,
    lr: f64,
) {
    debug_assert_eq!(theta.len(), g.len());
    for i in 0..theta.len() {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        theta[i] -= lr * m_hat / (v_hat.sqrt() + epsilon);
    }
}
