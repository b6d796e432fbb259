//! Replay-trained Q-learning over the classification environment.
//!
//! One training run: for every epoch, walk one shuffled episode; at each
//! sample act epsilon-greedily, store the transition, and (once the buffer
//! holds a full batch) take one Adam step on a uniformly sampled minibatch.
//! The double-Q variant additionally keeps a periodically synced target
//! network and blends the bootstrapped target with the current estimate.

use crate::env::{CmdpEnv, EnvError, SampleSet};
use crate::loss::{build_q_target, loss_and_grad, LossError, LossKind};
use crate::nn::{adam_step, sync_target, AdamState, Gradients, Network, NetworkSpec, NnError};
use crate::replay::{ReplayBuffer, Transition};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("network predicts {net} classes but dataset has {data}")]
    ClassMismatch { net: usize, data: usize },
    #[error("network expects {net} features but dataset rows have {data}")]
    FeatureMismatch { net: usize, data: usize },
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Loss(#[from] LossError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Dqn,
    Ddqn,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Dqn => "dqn",
            Algorithm::Ddqn => "ddqn",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = AgentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dqn" => Ok(Algorithm::Dqn),
            "ddqn" => Ok(Algorithm::Ddqn),
            other => Err(AgentError::Config(format!(
                "unknown algorithm {other:?} (expected dqn or ddqn)"
            ))),
        }
    }
}

/// Training hyperparameters. The defaults are the reference settings used
/// across this project: batch 256, 25 epochs, epsilon 0.8 decaying 0.95 per
/// epoch to a floor of 0.01, discount 0.001, Adam at 0.001, blend alpha 1.0
/// decaying 0.99 per epoch, buffer 10k, target sync every 200 steps.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    pub algorithm: Algorithm,
    pub batch_size: usize,
    pub epochs: usize,
    pub epsilon_initial: f64,
    pub epsilon_decay: f64,
    pub epsilon_floor: f64,
    pub gamma: f64,
    pub learning_rate: f64,
    pub alpha_initial: f64,
    pub alpha_decay: f64,
    pub buffer_capacity: usize,
    pub target_sync_period: usize,
    pub loss: LossKind,
    pub seed: u64,
    /// Stop after the first epoch whose greedy training accuracy reaches
    /// this value. `None` runs all epochs.
    pub early_stop_accuracy: Option<f64>,
    /// Evaluate greedy accuracy on the training split after each epoch.
    /// Costs one forward pass per sample; when off the log records NaN.
    pub log_train_accuracy: bool,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Dqn,
            batch_size: 256,
            epochs: 25,
            epsilon_initial: 0.8,
            epsilon_decay: 0.95,
            epsilon_floor: 0.01,
            gamma: 0.001,
            learning_rate: 0.001,
            alpha_initial: 1.0,
            alpha_decay: 0.99,
            buffer_capacity: 10_000,
            target_sync_period: 200,
            loss: LossKind::Cce,
            seed: 0,
            early_stop_accuracy: None,
            log_train_accuracy: true,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        let err = |msg: String| Err(AgentError::Config(msg));
        if self.batch_size == 0 {
            return err("batch_size must be >= 1".into());
        }
        if self.epochs == 0 {
            return err("epochs must be >= 1".into());
        }
        if self.buffer_capacity < self.batch_size {
            return err(format!(
                "buffer_capacity {} is smaller than batch_size {}; no update would ever run",
                self.buffer_capacity, self.batch_size
            ));
        }
        if !(0.0..=1.0).contains(&self.epsilon_initial) {
            return err(format!("epsilon_initial {} outside [0, 1]", self.epsilon_initial));
        }
        if !(self.epsilon_decay > 0.0 && self.epsilon_decay <= 1.0) {
            return err(format!("epsilon_decay {} outside (0, 1]", self.epsilon_decay));
        }
        if !(0.0..=1.0).contains(&self.epsilon_floor) {
            return err(format!("epsilon_floor {} outside [0, 1]", self.epsilon_floor));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return err(format!("gamma {} outside [0, 1]", self.gamma));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return err(format!("learning_rate {} must be positive", self.learning_rate));
        }
        if !(0.0..=1.0).contains(&self.alpha_initial) {
            return err(format!("alpha_initial {} outside [0, 1]", self.alpha_initial));
        }
        if !(self.alpha_decay > 0.0 && self.alpha_decay <= 1.0) {
            return err(format!("alpha_decay {} outside (0, 1]", self.alpha_decay));
        }
        if self.target_sync_period == 0 {
            return err("target_sync_period must be >= 1".into());
        }
        if let Some(acc) = self.early_stop_accuracy {
            if !(0.0..=1.0).contains(&acc) {
                return err(format!("early_stop_accuracy {acc} outside [0, 1]"));
            }
            if !self.log_train_accuracy {
                return err("early_stop_accuracy requires log_train_accuracy".into());
            }
        }
        if let LossKind::Huber { delta } = self.loss {
            if !(delta.is_finite() && delta > 0.0) {
                return err(format!("huber delta {delta} must be positive"));
            }
        }
        Ok(())
    }
}

/// Lowest index wins ties.
pub fn argmax(q: &[f64]) -> usize {
    assert!(!q.is_empty(), "argmax of empty slice");
    let mut best = 0;
    for (i, &v) in q.iter().enumerate().skip(1) {
        if v > q[best] {
            best = i;
        }
    }
    best
}

/// Epsilon-greedy: with probability `epsilon` a uniform action, otherwise
/// the greedy argmax.
pub fn select_action<R: Rng>(q_values: &[f64], epsilon: f64, rng: &mut R) -> usize {
    if rng.gen::<f64>() < epsilon {
        rng.gen_range(0..q_values.len())
    } else {
        argmax(q_values)
    }
}

/// Bootstrapped scalar target: `r + gamma * next_max`, or `r` alone at the
/// end of an episode.
pub fn td_target(reward: f64, gamma: f64, next_max: Option<f64>) -> f64 {
    match next_max {
        Some(m) => reward + gamma * m,
        None => reward,
    }
}

/// Standard target: bootstrap with the maximum of the current network at the
/// successor state.
pub fn dqn_target(t: &Transition, gamma: f64, current: &Network) -> Result<f64, AgentError> {
    let next_max = match &t.next_state {
        Some(s) => {
            let q = current.predict(s)?;
            Some(q[argmax(&q)])
        }
        None => None,
    };
    Ok(td_target(t.reward, gamma, next_max))
}

/// Double-Q target: the target network chooses the successor action, the
/// current network values it, and the result is blended with the current
/// estimate: `(1 - alpha) * Q(s, a) + alpha * (r + gamma * Q(s', a*))`.
/// Terminal transitions drop the bootstrap term.
pub fn ddqn_target(
    t: &Transition,
    gamma: f64,
    alpha: f64,
    current: &Network,
    target: &Network,
) -> Result<f64, AgentError> {
    let q_sa = current.predict(&t.state)?[t.action];
    ddqn_target_with_q(t, gamma, alpha, q_sa, current, target)
}

fn ddqn_target_with_q(
    t: &Transition,
    gamma: f64,
    alpha: f64,
    q_sa: f64,
    current: &Network,
    target: &Network,
) -> Result<f64, AgentError> {
    let boot = match &t.next_state {
        Some(s) => {
            let chooser = target.predict(s)?;
            let a_star = argmax(&chooser);
            td_target(t.reward, gamma, Some(current.predict(s)?[a_star]))
        }
        None => t.reward,
    };
    Ok((1.0 - alpha) * q_sa + alpha * boot)
}

/// Per-epoch training record. `cumulative_reward` and `correct_actions`
/// describe the exploring policy during the episode; `train_accuracy` is the
/// greedy policy evaluated on the training split after the epoch.
#[derive(Debug, Clone)]
pub struct EpochStats {
    pub epoch: usize,
    pub samples: usize,
    pub correct_actions: i64,
    pub cumulative_reward: i64,
    pub mean_loss: f64,
    pub train_accuracy: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TrainLog {
    pub epochs: Vec<EpochStats>,
}

impl TrainLog {
    /// Line-per-epoch CSV. Wall time is deliberately not a column so that
    /// reruns of the same seed produce byte-identical files.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "epoch,samples,correct_actions,cumulative_reward,mean_loss,train_accuracy,epsilon,alpha\n",
        );
        for e in &self.epochs {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                e.epoch,
                e.samples,
                e.correct_actions,
                e.cumulative_reward,
                e.mean_loss,
                e.train_accuracy,
                e.epsilon,
                e.alpha
            ));
        }
        out
    }

    pub fn final_train_accuracy(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.train_accuracy)
    }
}

/// A Q-network plus everything needed to train it.
#[derive(Debug)]
pub struct Agent {
    net: Network,
    config: AgentConfig,
}

impl Agent {
    /// Fresh network initialized from `config.seed`.
    pub fn new(spec: NetworkSpec, config: AgentConfig) -> Result<Self, AgentError> {
        config.validate()?;
        let net = Network::init(spec, config.seed)?;
        Ok(Self { net, config })
    }

    /// Wraps an existing network (e.g. a grafted transfer network); frozen
    /// layers keep their parameters bitwise intact through training.
    pub fn from_network(net: Network, config: AgentConfig) -> Result<Self, AgentError> {
        config.validate()?;
        Ok(Self { net, config })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn into_network(self) -> Network {
        self.net
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn train<D: SampleSet>(&mut self, data: &D) -> Result<TrainLog, AgentError> {
        self.train_with_progress(data, |_| {})
    }

    /// Runs the full training loop, invoking `on_epoch` after each epoch.
    pub fn train_with_progress<D: SampleSet>(
        &mut self,
        data: &D,
        mut on_epoch: impl FnMut(&EpochStats),
    ) -> Result<TrainLog, AgentError> {
        self.config.validate()?;
        if data.is_empty() {
            return Err(EnvError::EmptyDataset.into());
        }
        let out_len = self.net.spec().output_len()?;
        if out_len != data.num_classes() {
            return Err(AgentError::ClassMismatch {
                net: out_len,
                data: data.num_classes(),
            });
        }
        let expected_features = self.net.spec().input_channels * self.net.spec().input_length;
        if data.features(0).len() != expected_features {
            return Err(AgentError::FeatureMismatch {
                net: expected_features,
                data: data.features(0).len(),
            });
        }

        let cfg = self.config.clone();
        // Independent ChaCha streams per purpose keep the run reproducible
        // regardless of how many draws each consumer makes.
        let mut action_rng = stream_rng(cfg.seed, 1);
        let mut sample_rng = stream_rng(cfg.seed, 2);
        let mut shuffle_rng = stream_rng(cfg.seed, 3);

        let mut buffer = ReplayBuffer::new(cfg.buffer_capacity);
        let mut target = match cfg.algorithm {
            Algorithm::Ddqn => Some(self.net.clone()),
            Algorithm::Dqn => None,
        };
        let mut adam = AdamState::new(self.net.params());
        let mut epsilon = cfg.epsilon_initial;
        let mut alpha = cfg.alpha_initial;
        let mut grad_steps: u64 = 0;
        let mut log = TrainLog::default();

        for epoch in 1..=cfg.epochs {
            let started = Instant::now();
            let episode_seed = shuffle_rng.next_u64();
            let (mut env, first) = CmdpEnv::reset(data, episode_seed)?;
            let mut state = first.features.to_vec();
            let mut correct: i64 = 0;
            let mut cumulative_reward: i64 = 0;
            let mut loss_sum = 0.0;
            let mut update_count: u64 = 0;

            loop {
                let q = self.net.predict(&state)?;
                let action = select_action(&q, epsilon, &mut action_rng);
                let step = env.step(action)?;
                cumulative_reward += step.reward.value() as i64;
                if step.reward.is_correct() {
                    correct += 1;
                }
                buffer.push(Transition {
                    state: std::mem::take(&mut state),
                    action,
                    reward: step.reward.value(),
                    next_state: step.next.map(|s| s.features.to_vec()),
                });

                if buffer.len() >= cfg.batch_size {
                    let (batch_loss, grads) =
                        self.batch_gradients(&buffer, &mut sample_rng, alpha, target.as_ref())?;
                    adam_step(self.net.params_mut(), &grads, &mut adam, cfg.learning_rate)?;
                    grad_steps += 1;
                    loss_sum += batch_loss;
                    update_count += 1;
                    if let Some(t) = target.as_mut() {
                        if grad_steps.is_multiple_of(cfg.target_sync_period as u64) {
                            *t.params_mut() = sync_target(self.net.params());
                        }
                    }
                }

                match step.next {
                    Some(next) => state = next.features.to_vec(),
                    None => break,
                }
            }

            let train_accuracy = if cfg.log_train_accuracy {
                self.greedy_accuracy(data)?
            } else {
                f64::NAN
            };
            let stats = EpochStats {
                epoch,
                samples: data.len(),
                correct_actions: correct,
                cumulative_reward,
                mean_loss: if update_count > 0 {
                    loss_sum / update_count as f64
                } else {
                    f64::NAN
                },
                train_accuracy,
                epsilon,
                alpha: match cfg.algorithm {
                    Algorithm::Ddqn => alpha,
                    Algorithm::Dqn => f64::NAN,
                },
                wall_time_s: started.elapsed().as_secs_f64(),
            };
            on_epoch(&stats);
            log.epochs.push(stats);

            epsilon = (epsilon * cfg.epsilon_decay).max(cfg.epsilon_floor);
            if cfg.algorithm == Algorithm::Ddqn {
                alpha *= cfg.alpha_decay;
            }
            if let Some(stop) = cfg.early_stop_accuracy {
                if train_accuracy >= stop {
                    break;
                }
            }
        }
        Ok(log)
    }

    fn batch_gradients<R: Rng>(
        &self,
        buffer: &ReplayBuffer,
        rng: &mut R,
        alpha: f64,
        target: Option<&Network>,
    ) -> Result<(f64, Gradients), AgentError> {
        let cfg = &self.config;
        let mut acc: Option<Gradients> = None;
        let mut loss_sum = 0.0;
        for _ in 0..cfg.batch_size {
            let tr = buffer.sample(rng);
            let (q, cache) = self.net.forward(&tr.state)?;
            let td = match cfg.algorithm {
                Algorithm::Dqn => dqn_target(tr, cfg.gamma, &self.net)?,
                Algorithm::Ddqn => ddqn_target_with_q(
                    tr,
                    cfg.gamma,
                    alpha,
                    q[tr.action],
                    &self.net,
                    target.expect("double-Q training keeps a target network"),
                )?,
            };
            let target_vec = build_q_target(&q, tr.action, td, cfg.loss)?;
            let (loss_value, loss_grad) = loss_and_grad(cfg.loss, &q, &target_vec)?;
            let grads = self.net.backward(&cache, &loss_grad)?;
            match acc.as_mut() {
                Some(a) => a.add_assign(&grads),
                None => acc = Some(grads),
            }
            loss_sum += loss_value;
        }
        let mut grads = acc.expect("batch_size >= 1");
        let inv = 1.0 / cfg.batch_size as f64;
        grads.scale(inv);
        Ok((loss_sum * inv, grads))
    }

    /// Fraction of samples whose greedy action matches the label.
    pub fn greedy_accuracy<D: SampleSet>(&self, data: &D) -> Result<f64, AgentError> {
        if data.is_empty() {
            return Err(EnvError::EmptyDataset.into());
        }
        let mut correct = 0usize;
        for i in 0..data.len() {
            let q = self.net.predict(data.features(i))?;
            if argmax(&q) == data.label(i) {
                correct += 1;
            }
        }
        Ok(correct as f64 / data.len() as f64)
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
