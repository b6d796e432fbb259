//! Deterministic stratified train/test splitting.
//!
//! Every class is split independently at the requested fraction (rounded,
//! then clamped so both sides keep at least one sample when the class has
//! two or more). Singleton classes go to the training side. Output index
//! lists are sorted ascending, so original row order is preserved.

use super::encode::EncodedDataset;
use super::table::RawTable;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("split fraction {0} outside (0, 1)")]
    Fraction(f64),
    #[error("nothing to split")]
    Empty,
    #[error("row {0} has no label")]
    MissingLabel(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Splits row indices grouped by label key. Group order is the keys'
/// sort order, which together with the seed fixes the outcome.
pub fn stratified_split_indices<K: Ord>(
    labels: &[K],
    train_fraction: f64,
    seed: u64,
) -> Result<SplitIndices, SplitError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(SplitError::Fraction(train_fraction));
    }
    if labels.is_empty() {
        return Err(SplitError::Empty);
    }
    let mut groups: BTreeMap<&K, Vec<usize>> = BTreeMap::new();
    for (i, key) in labels.iter().enumerate() {
        groups.entry(key).or_default().push(i);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (_, mut idx) in groups {
        let n = idx.len();
        if n == 1 {
            train.push(idx[0]);
            continue;
        }
        idx.shuffle(&mut rng);
        let want = (train_fraction * n as f64).round() as usize;
        let n_train = want.clamp(1, n - 1);
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndices { train, test })
}

/// Stratified split of a cleaned table by its label column.
pub fn split_table(
    table: &RawTable,
    train_fraction: f64,
    seed: u64,
) -> Result<(RawTable, RawTable, SplitIndices), SplitError> {
    let labels: Vec<String> = (0..table.num_rows())
        .map(|i| {
            table
                .label_of(i)
                .map(String::from)
                .ok_or(SplitError::MissingLabel(i))
        })
        .collect::<Result<_, _>>()?;
    let idx = stratified_split_indices(&labels, train_fraction, seed)?;
    Ok((
        table.select_rows(&idx.train),
        table.select_rows(&idx.test),
        idx,
    ))
}

/// Stratified split of an already-encoded dataset by its integer labels.
pub fn split_encoded(
    data: &EncodedDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(EncodedDataset, EncodedDataset, SplitIndices), SplitError> {
    let idx = stratified_split_indices(data.labels(), train_fraction, seed)?;
    Ok((
        data.select_rows(&idx.train),
        data.select_rows(&idx.test),
        idx,
    ))
}
