//! Classification posed as a sequential decision process: each episode walks
//! a fresh shuffle of the dataset, the action is a class prediction, and the
//! reward is +1 for a correct label and -1 otherwise. Transitions do not
//! depend on the action taken.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("episode is finished; call reset")]
    Terminal,
    #[error("action {action} out of range for {classes} classes")]
    InvalidAction { action: usize, classes: usize },
}

/// Read-only view over feature rows with integer class labels.
pub trait SampleSet {
    fn len(&self) -> usize;
    fn features(&self, idx: usize) -> &[f64];
    fn label(&self, idx: usize) -> usize;
    fn num_classes(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Borrowed sample handed to the agent.
#[derive(Debug, Clone, Copy)]
pub struct LabeledSample<'a> {
    pub features: &'a [f64],
    pub label: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reward {
    Correct,
    Incorrect,
}

impl Reward {
    pub fn value(self) -> f64 {
        match self {
            Reward::Correct => 1.0,
            Reward::Incorrect => -1.0,
        }
    }

    pub fn is_correct(self) -> bool {
        self == Reward::Correct
    }
}

/// Result of one step: the reward for the consumed sample, and the next
/// sample unless the episode just ended.
#[derive(Debug, Clone, Copy)]
pub struct Step<'a> {
    pub reward: Reward,
    pub next: Option<LabeledSample<'a>>,
}

/// One episode over a seeded permutation of the dataset. The cursor starts
/// at 0 and each sample is visited exactly once.
#[derive(Debug)]
pub struct CmdpEnv<'a, D: SampleSet> {
    data: &'a D,
    permutation: Vec<usize>,
    cursor: usize,
    terminal: bool,
}

impl<'a, D: SampleSet> CmdpEnv<'a, D> {
    /// Starts an episode; returns the environment and the first sample.
    pub fn reset(data: &'a D, seed: u64) -> Result<(Self, LabeledSample<'a>), EnvError> {
        if data.is_empty() {
            return Err(EnvError::EmptyDataset);
        }
        let mut permutation: Vec<usize> = (0..data.len()).collect();
        permutation.shuffle(&mut ChaCha20Rng::seed_from_u64(seed));
        let first = sample_at(data, permutation[0]);
        Ok((
            Self {
                data,
                permutation,
                cursor: 0,
                terminal: false,
            },
            first,
        ))
    }

    /// Scores `action` against the current sample and advances. The successor
    /// state is the next sample in the permutation regardless of the action.
    pub fn step(&mut self, action: usize) -> Result<Step<'a>, EnvError> {
        if self.terminal {
            return Err(EnvError::Terminal);
        }
        let classes = self.data.num_classes();
        if action >= classes {
            return Err(EnvError::InvalidAction { action, classes });
        }
        let current = sample_at(self.data, self.permutation[self.cursor]);
        let reward = if action == current.label {
            Reward::Correct
        } else {
            Reward::Incorrect
        };
        self.cursor += 1;
        let next = if self.cursor == self.permutation.len() {
            self.terminal = true;
            None
        } else {
            Some(sample_at(self.data, self.permutation[self.cursor]))
        };
        Ok(Step { reward, next })
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal
    }

    /// Visit order of the current episode.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Samples already consumed this episode.
    pub fn cursor(&self) -> usize {
        self.cursor
    }
}

fn sample_at<'a, D: SampleSet>(data: &'a D, idx: usize) -> LabeledSample<'a> {
    LabeledSample {
        features: data.features(idx),
        label: data.label(idx),
    }
}

/// Plain owned sample set, mainly for tests and small synthetic data.
#[derive(Debug, Clone)]
pub struct VecSampleSet {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
}

impl SampleSet for VecSampleSet {
    fn len(&self) -> usize {
        self.labels.len()
    }

    fn features(&self, idx: usize) -> &[f64] {
        &self.features[idx]
    }

    fn label(&self, idx: usize) -> usize {
        self.labels[idx]
    }

    fn num_classes(&self) -> usize {
        self.num_classes
    }
}
