//! Bounded experience store with uniform sampling.

use rand::Rng;
use std::collections::VecDeque;

/// One observed transition. `next_state` is `None` when the episode ended on
/// this step, in which case targets use the reward alone.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Option<Vec<f64>>,
}

/// Ring buffer over transitions: once full, each push evicts the oldest
/// entry. Sampling is uniform with replacement over the current contents.
#[derive(Debug)]
pub struct ReplayBuffer {
    entries: VecDeque<Transition>,
    capacity: usize,
    inserted_total: u64,
}

impl ReplayBuffer {
    /// `capacity` must be at least 1.
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "replay buffer capacity must be >= 1");
        Self {
            entries: VecDeque::with_capacity(capacity),
            capacity,
            inserted_total: 0,
        }
    }

    pub fn push(&mut self, t: Transition) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(t);
        self.inserted_total += 1;
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Lifetime insertions, including evicted ones.
    pub fn inserted_total(&self) -> u64 {
        self.inserted_total
    }

    pub fn get(&self, idx: usize) -> &Transition {
        &self.entries[idx]
    }

    /// One uniform draw; the same entry can be drawn again next call.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> &Transition {
        assert!(!self.entries.is_empty(), "cannot sample an empty buffer");
        &self.entries[rng.gen_range(0..self.entries.len())]
    }
}
