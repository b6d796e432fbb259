//! Network intrusion detection by Q-learning over flow records.
//!
//! The pieces, bottom up:
//!
//! - [`nn`]: a small 1-D convolutional network in f64 with exact
//!   backpropagation, Adam, and a versioned weight file format.
//! - [`loss`]: squared-error, cross-entropy, KL, and Huber objectives with
//!   analytic gradients, plus Q-target vector construction for each.
//! - [`env`]: the classification-as-control environment; an episode walks
//!   a shuffled dataset, rewarding correct class actions with +1.
//! - [`replay`] and [`agent`]: experience replay and the epsilon-greedy
//!   training loops (standard and double-Q) with per-epoch logs.
//! - [`data`]: CSV schemas, rule-based cleaning, train-fitted encoding,
//!   stratified splits, synthetic blobs, and the dataset container file.
//! - [`metrics`]: confusion-matrix reports with weighted averages.
//! - [`transfer`]: freezing a trained conv front end onto a new head for
//!   a different feature space.
//!
//! Everything randomized is seeded and deterministic: a rerun with the
//! same inputs produces byte-identical models, logs, and datasets.

pub mod agent;
pub mod data;
pub mod env;
pub mod loss;
pub mod metrics;
pub mod nn;
pub mod replay;
pub mod tensor;
pub mod transfer;

pub(crate) mod binio;

pub use agent::{Agent, AgentConfig, AgentError, Algorithm, EpochStats, TrainLog};
pub use env::{CmdpEnv, EnvError, Reward, SampleSet, VecSampleSet};
pub use loss::{LossError, LossKind};
pub use metrics::{evaluate, EvaluationReport, MetricsError};
pub use nn::{Network, NetworkSpec, NnError, WeightFileError};
pub use replay::{ReplayBuffer, Transition};
pub use transfer::{build_transfer_net, TransferError, TransferPlan};
