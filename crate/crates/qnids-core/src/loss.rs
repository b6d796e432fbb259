//! Loss functions over Q-vectors: value plus analytic gradient with respect
//! to the prediction, and construction of per-transition training targets.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Floor applied inside logarithms so zero probabilities stay finite.
pub const LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum LossError {
    #[error("prediction has {prediction} entries, target has {target}")]
    Length { prediction: usize, target: usize },
    #[error("{loss} requires a distribution-mode target")]
    Mode { loss: &'static str },
    #[error("non-finite value in {0}")]
    Numeric(String),
    #[error("invalid target: {0}")]
    Target(String),
    #[error("unknown loss name {0:?} (expected mse, cce, kld or huber)")]
    Name(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Mse,
    /// Categorical cross-entropy, `-sum(t * ln p)`.
    Cce,
    /// KL divergence from the target distribution to the prediction,
    /// `sum(t * ln(t / p))`.
    Kld,
    Huber { delta: f64 },
}

impl LossKind {
    pub fn huber_default() -> Self {
        LossKind::Huber { delta: 1.0 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LossKind::Mse => "mse",
            LossKind::Cce => "cce",
            LossKind::Kld => "kld",
            LossKind::Huber { .. } => "huber",
        }
    }

    /// True for losses whose targets must be probability distributions.
    pub fn wants_distribution(&self) -> bool {
        matches!(self, LossKind::Cce | LossKind::Kld)
    }

    pub const ALL: [LossKind; 4] = [
        LossKind::Mse,
        LossKind::Cce,
        LossKind::Kld,
        LossKind::Huber { delta: 1.0 },
    ];
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = LossError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mse" => Ok(LossKind::Mse),
            "cce" => Ok(LossKind::Cce),
            "kld" => Ok(LossKind::Kld),
            "huber" => Ok(LossKind::huber_default()),
            other => Err(LossError::Name(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetMode {
    Regression,
    Distribution,
}

/// A loss target together with how it was constructed. Distribution targets
/// are validated to be non-negative and sum to 1 within 1e-9.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetVector {
    values: Vec<f64>,
    mode: TargetMode,
}

impl TargetVector {
    pub fn regression(values: Vec<f64>) -> Result<Self, LossError> {
        if !values.iter().all(|v| v.is_finite()) {
            return Err(LossError::Numeric("regression target".into()));
        }
        Ok(Self {
            values,
            mode: TargetMode::Regression,
        })
    }

    pub fn distribution(values: Vec<f64>) -> Result<Self, LossError> {
        if !values.iter().all(|v| v.is_finite()) {
            return Err(LossError::Numeric("distribution target".into()));
        }
        if values.iter().any(|&v| v < 0.0) {
            return Err(LossError::Target("distribution entries must be >= 0".into()));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(LossError::Target(format!(
                "distribution sums to {sum}, expected 1"
            )));
        }
        Ok(Self {
            values,
            mode: TargetMode::Distribution,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mode(&self) -> TargetMode {
        self.mode
    }
}

/// Scalar loss and its gradient with respect to `prediction`.
///
/// MSE and Huber average over entries; CCE and KL sum over classes. CCE and
/// KL clamp predictions at `LOG_FLOOR` inside the logarithm and require a
/// distribution-mode target.
pub fn loss_and_grad(
    kind: LossKind,
    prediction: &[f64],
    target: &TargetVector,
) -> Result<(f64, Vec<f64>), LossError> {
    let t = target.values();
    if prediction.len() != t.len() {
        return Err(LossError::Length {
            prediction: prediction.len(),
            target: t.len(),
        });
    }
    if prediction.is_empty() {
        return Err(LossError::Target("empty prediction".into()));
    }
    if !prediction.iter().all(|v| v.is_finite()) {
        return Err(LossError::Numeric("prediction".into()));
    }
    if kind.wants_distribution() && target.mode() != TargetMode::Distribution {
        return Err(LossError::Mode { loss: kind.name() });
    }
    let n = prediction.len() as f64;
    let mut grad = vec![0.0; prediction.len()];
    let mut value = 0.0;
    match kind {
        LossKind::Mse => {
            for i in 0..prediction.len() {
                let err = prediction[i] - t[i];
                value += err * err;
                grad[i] = 2.0 * err / n;
            }
            value /= n;
        }
        LossKind::Huber { delta } => {
            if !(delta.is_finite() && delta > 0.0) {
                return Err(LossError::Target(format!("huber delta {delta} must be > 0")));
            }
            for i in 0..prediction.len() {
                let err = prediction[i] - t[i];
                if err.abs() <= delta {
                    value += 0.5 * err * err;
                    grad[i] = err / n;
                } else {
                    value += delta * err.abs() - 0.5 * delta * delta;
                    grad[i] = delta * err.signum() / n;
                }
            }
            value /= n;
        }
        LossKind::Cce => {
            for i in 0..prediction.len() {
                let p = prediction[i].max(LOG_FLOOR);
                value -= t[i] * p.ln();
                grad[i] = -t[i] / p;
            }
        }
        LossKind::Kld => {
            for i in 0..prediction.len() {
                let ti = t[i];
                if ti > 0.0 {
                    let p = prediction[i].max(LOG_FLOOR);
                    value += ti * (ti / p).ln();
                    grad[i] = -ti / p;
                }
            }
        }
    }
    Ok((value, grad))
}

/// Builds the training target for one transition: the current prediction
/// with entry `action` replaced by `td_target`.
///
/// For MSE/Huber the vector is used as-is (regression mode). For CCE/KL it
/// is clamped to [0, 1] and renormalized to sum 1; if everything clamps to
/// ~zero the target falls back to a one-hot at `action`.
pub fn build_q_target(
    current_q: &[f64],
    action: usize,
    td_target: f64,
    kind: LossKind,
) -> Result<TargetVector, LossError> {
    if action >= current_q.len() {
        return Err(LossError::Target(format!(
            "action {action} out of range for {} outputs",
            current_q.len()
        )));
    }
    if !td_target.is_finite() {
        return Err(LossError::Numeric("td target".into()));
    }
    if !current_q.iter().all(|v| v.is_finite()) {
        return Err(LossError::Numeric("current q".into()));
    }
    let mut values = current_q.to_vec();
    values[action] = td_target;
    if !kind.wants_distribution() {
        return TargetVector::regression(values);
    }
    for v in values.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    let sum: f64 = values.iter().sum();
    if sum <= 1e-9 {
        values.fill(0.0);
        values[action] = 1.0;
    } else {
        for v in values.iter_mut() {
            *v /= sum;
        }
    }
    TargetVector::distribution(values)
}
