//! Seeded Gaussian-blob datasets for tests and demos.
//!
//! Class `c` gets an axis-aligned center: coordinate `c` equals
//! `separation`, the rest are zero, with unit-variance noise on every
//! coordinate. Larger separations make the classes cleanly learnable.

use super::encode::EncodedDataset;
use super::split::{stratified_split_indices, SplitError};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SyntheticError {
    #[error("need at least 2 classes, got {0}")]
    Classes(usize),
    #[error("need at least one sample per class ({classes}), got {samples}")]
    Samples { samples: usize, classes: usize },
    #[error("need features >= classes ({classes}) for distinct centers, got {features}")]
    Features { features: usize, classes: usize },
    #[error("separation {0} must be finite and non-negative")]
    Separation(f64),
    #[error(transparent)]
    Split(#[from] SplitError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub samples: usize,
    pub features: usize,
    pub classes: usize,
    pub separation: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    fn validate(&self) -> Result<(), SyntheticError> {
        if self.classes < 2 {
            return Err(SyntheticError::Classes(self.classes));
        }
        if self.samples < self.classes {
            return Err(SyntheticError::Samples {
                samples: self.samples,
                classes: self.classes,
            });
        }
        if self.features < self.classes {
            return Err(SyntheticError::Features {
                features: self.features,
                classes: self.classes,
            });
        }
        if !(self.separation.is_finite() && self.separation >= 0.0) {
            return Err(SyntheticError::Separation(self.separation));
        }
        Ok(())
    }
}

/// Raw (unscaled) samples with round-robin balanced labels.
pub fn generate(spec: &SyntheticSpec) -> Result<(Vec<Vec<f64>>, Vec<usize>), SyntheticError> {
    spec.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let mut features = Vec::with_capacity(spec.samples);
    let mut labels = Vec::with_capacity(spec.samples);
    for i in 0..spec.samples {
        let class = i % spec.classes;
        let row: Vec<f64> = (0..spec.features)
            .map(|j| {
                let center = if j == class { spec.separation } else { 0.0 };
                center + noise.sample(&mut rng)
            })
            .collect();
        features.push(row);
        labels.push(class);
    }
    Ok((features, labels))
}

/// Generates, splits stratified at `train_fraction`, then min-max scales
/// both splits with ranges fitted on the training side only.
pub fn generate_split(
    spec: &SyntheticSpec,
    train_fraction: f64,
    split_seed: u64,
) -> Result<(EncodedDataset, EncodedDataset), SyntheticError> {
    let (features, labels) = generate(spec)?;
    let idx = stratified_split_indices(&labels, train_fraction, split_seed)?;

    let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); spec.features];
    for &i in &idx.train {
        for (j, &v) in features[i].iter().enumerate() {
            ranges[j].0 = ranges[j].0.min(v);
            ranges[j].1 = ranges[j].1.max(v);
        }
    }

    let feature_names: Vec<String> = (0..spec.features).map(|j| format!("f{j}")).collect();
    let label_names: Vec<String> = (0..spec.classes).map(|c| format!("class_{c}")).collect();
    let scale = |rows: &[usize]| {
        let mut matrix = Vec::with_capacity(rows.len() * spec.features);
        let mut out_labels = Vec::with_capacity(rows.len());
        for &i in rows {
            for (j, &v) in features[i].iter().enumerate() {
                let (min, max) = ranges[j];
                let scaled = if max > min { (v - min) / (max - min) } else { 0.0 };
                matrix.push(scaled.clamp(0.0, 1.0));
            }
            out_labels.push(labels[i]);
        }
        EncodedDataset::new(
            matrix,
            spec.features,
            out_labels,
            label_names.clone(),
            feature_names.clone(),
        )
    };
    Ok((scale(&idx.train), scale(&idx.test)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::SampleSet;

    fn spec() -> SyntheticSpec {
        SyntheticSpec {
            samples: 300,
            features: 8,
            classes: 3,
            separation: 8.0,
            seed: 11,
        }
    }

    #[test]
    fn balanced_and_sized() {
        let (features, labels) = generate(&spec()).unwrap();
        assert_eq!(features.len(), 300);
        assert_eq!(labels.len(), 300);
        for c in 0..3 {
            assert_eq!(labels.iter().filter(|&&l| l == c).count(), 100);
        }
        assert!(features.iter().all(|r| r.len() == 8));
    }

    #[test]
    fn bitwise_deterministic() {
        let (a, _) = generate(&spec()).unwrap();
        let (b, _) = generate(&spec()).unwrap();
        assert_eq!(a, b);
        let different = SyntheticSpec { seed: 12, ..spec() };
        let (c, _) = generate(&different).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn well_separated_centers_classify_by_distance() {
        let (features, labels) = generate(&spec()).unwrap();
        let center = |c: usize, j: usize| if j == c { 8.0 } else { 0.0 };
        let mut hits = 0;
        for (row, &label) in features.iter().zip(&labels) {
            let nearest = (0..3)
                .min_by(|&a, &b| {
                    let da: f64 = row
                        .iter()
                        .enumerate()
                        .map(|(j, &v)| (v - center(a, j)).powi(2))
                        .sum();
                    let db: f64 = row
                        .iter()
                        .enumerate()
                        .map(|(j, &v)| (v - center(b, j)).powi(2))
                        .sum();
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap();
            if nearest == label {
                hits += 1;
            }
        }
        assert!(hits as f64 / labels.len() as f64 > 0.999, "hits {hits}");
    }

    #[test]
    fn split_is_scaled_and_stratified() {
        let (train, test) = generate_split(&spec(), 0.8, 5).unwrap();
        assert_eq!(train.n_rows(), 240);
        assert_eq!(test.n_rows(), 60);
        assert_eq!(train.num_classes(), 3);
        assert!(train.matrix().iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(test.matrix().iter().all(|v| (0.0..=1.0).contains(v)));
        // Training ranges are exact, so every feature touches 0 and 1.
        for j in 0..8 {
            let col: Vec<f64> = (0..train.n_rows()).map(|i| train.row(i)[j]).collect();
            let min = col.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(min, 0.0);
            assert_eq!(max, 1.0);
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let bad = SyntheticSpec {
            features: 2,
            ..spec()
        };
        assert!(matches!(
            generate(&bad),
            Err(SyntheticError::Features { .. })
        ));
        let bad = SyntheticSpec {
            classes: 1,
            ..spec()
        };
        assert!(matches!(generate(&bad), Err(SyntheticError::Classes(1))));
        let bad = SyntheticSpec {
            separation: f64::NAN,
            ..spec()
        };
        assert!(matches!(generate(&bad), Err(SyntheticError::Separation(_))));
    }
}
