//! Feature encoding: one-hot vocabularies, IPv4-to-integer, min-max
//! scaling. All statistics come from the training split; the same fitted
//! encoder then transforms any other split, with unseen categories encoded
//! as all-zero blocks and out-of-range numerics clipped to [0, 1].

use super::schema::ColumnKind;
use super::table::{Cell, RawTable};
use crate::env::SampleSet;
use std::net::Ipv4Addr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("schema has no label column")]
    NoLabelColumn,
    #[error("schema yields no feature columns")]
    NoFeatures,
    #[error("table has no rows")]
    Empty,
    #[error("row {row}, column {column}: missing value reached encoding")]
    MissingValue { row: usize, column: String },
    #[error("row {row}, column {column}: expected a number, found {value:?}")]
    NotNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}, column {column}: {value:?} is not an IPv4 address")]
    BadIp {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}: label {label:?} is not in the class list")]
    UnknownLabel { row: usize, label: String },
}

/// How one schema column expands into output features.
#[derive(Debug, Clone, PartialEq)]
enum FeatureStep {
    /// One output: the numeric value.
    Numeric { column: usize, name: String },
    /// `vocab.len()` outputs; exactly one is 1 for a known category, all
    /// zero for an unseen one. Vocabulary is sorted.
    OneHot {
        column: usize,
        name: String,
        vocab: Vec<String>,
    },
    /// One output: the address as its 32-bit integer value.
    Ip { column: usize, name: String },
}

impl FeatureStep {
    fn width(&self) -> usize {
        match self {
            FeatureStep::OneHot { vocab, .. } => vocab.len(),
            _ => 1,
        }
    }
}

/// Encoder state frozen on the training split.
#[derive(Debug, Clone)]
pub struct FittedEncoder {
    steps: Vec<FeatureStep>,
    /// Per output feature, the training min and max used for scaling.
    normalizer: Vec<(f64, f64)>,
    pub feature_names: Vec<String>,
    pub label_names: Vec<String>,
}

impl FittedEncoder {
    pub fn num_features(&self) -> usize {
        self.normalizer.len()
    }
}

/// Row-major encoded feature matrix plus integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset {
    matrix: Vec<f64>,
    n_features: usize,
    labels: Vec<usize>,
    pub label_names: Vec<String>,
    pub feature_names: Vec<String>,
}

impl EncodedDataset {
    pub fn new(
        matrix: Vec<f64>,
        n_features: usize,
        labels: Vec<usize>,
        label_names: Vec<String>,
        feature_names: Vec<String>,
    ) -> Self {
        assert_eq!(matrix.len(), n_features * labels.len(), "matrix shape");
        assert_eq!(feature_names.len(), n_features, "feature name count");
        assert!(
            labels.iter().all(|&l| l < label_names.len()),
            "label out of range"
        );
        Self {
            matrix,
            n_features,
            labels,
            label_names,
            feature_names,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.matrix[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    /// Keeps the rows at `indices`, in the order given.
    pub fn select_rows(&self, indices: &[usize]) -> EncodedDataset {
        let mut matrix = Vec::with_capacity(indices.len() * self.n_features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            matrix.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        EncodedDataset {
            matrix,
            n_features: self.n_features,
            labels,
            label_names: self.label_names.clone(),
            feature_names: self.feature_names.clone(),
        }
    }
}

impl SampleSet for EncodedDataset {
    fn len(&self) -> usize {
        self.labels.len()
    }

    fn features(&self, idx: usize) -> &[f64] {
        self.row(idx)
    }

    fn label(&self, idx: usize) -> usize {
        self.labels[idx]
    }

    fn num_classes(&self) -> usize {
        self.label_names.len()
    }
}

fn build_steps(table: &RawTable) -> Result<Vec<FeatureStep>, EncodeError> {
    let mut steps = Vec::new();
    for (ci, col) in table.schema.columns.iter().enumerate() {
        match col.kind {
            ColumnKind::Numeric | ColumnKind::Port => steps.push(FeatureStep::Numeric {
                column: ci,
                name: col.name.clone(),
            }),
            ColumnKind::IpAddress => steps.push(FeatureStep::Ip {
                column: ci,
                name: col.name.clone(),
            }),
            ColumnKind::Categorical => {
                let mut vocab: Vec<String> = table
                    .rows
                    .iter()
                    .filter_map(|r| r[ci].as_text().map(String::from))
                    .collect();
                vocab.sort_unstable();
                vocab.dedup();
                steps.push(FeatureStep::OneHot {
                    column: ci,
                    name: col.name.clone(),
                    vocab,
                });
            }
            ColumnKind::Label | ColumnKind::Ignored => {}
        }
    }
    if steps.is_empty() {
        return Err(EncodeError::NoFeatures);
    }
    Ok(steps)
}

fn expand_row(
    row: &[Cell],
    row_idx: usize,
    steps: &[FeatureStep],
    out: &mut Vec<f64>,
) -> Result<(), EncodeError> {
    for step in steps {
        match step {
            FeatureStep::Numeric { column, name } => match &row[*column] {
                Cell::Number(v) => out.push(*v),
                Cell::Text(s) => {
                    return Err(EncodeError::NotNumeric {
                        row: row_idx,
                        column: name.clone(),
                        value: s.clone(),
                    })
                }
                Cell::Missing => {
                    return Err(EncodeError::MissingValue {
                        row: row_idx,
                        column: name.clone(),
                    })
                }
            },
            FeatureStep::Ip { column, name } => match &row[*column] {
                Cell::Text(s) => match s.parse::<Ipv4Addr>() {
                    Ok(addr) => out.push(u32::from(addr) as f64),
                    Err(_) => {
                        return Err(EncodeError::BadIp {
                            row: row_idx,
                            column: name.clone(),
                            value: s.clone(),
                        })
                    }
                },
                Cell::Number(v) => out.push(*v),
                Cell::Missing => {
                    return Err(EncodeError::MissingValue {
                        row: row_idx,
                        column: name.clone(),
                    })
                }
            },
            FeatureStep::OneHot { column, name, vocab } => {
                let start = out.len();
                out.resize(start + vocab.len(), 0.0);
                match &row[*column] {
                    Cell::Text(s) => {
                        if let Ok(pos) = vocab.binary_search(s) {
                            out[start + pos] = 1.0;
                        }
                        // Unseen categories stay all zero.
                    }
                    Cell::Number(v) => {
                        let s = v.to_string();
                        if let Ok(pos) = vocab.binary_search(&s) {
                            out[start + pos] = 1.0;
                        }
                    }
                    Cell::Missing => {
                        return Err(EncodeError::MissingValue {
                            row: row_idx,
                            column: name.clone(),
                        })
                    }
                }
            }
        }
    }
    Ok(())
}

fn labels_of(table: &RawTable, label_names: &[String]) -> Result<Vec<usize>, EncodeError> {
    let lc = table.schema.label_column().ok_or(EncodeError::NoLabelColumn)?;
    table
        .rows
        .iter()
        .enumerate()
        .map(|(ri, row)| {
            let text = row[lc].as_text().ok_or_else(|| EncodeError::UnknownLabel {
                row: ri,
                label: row[lc].to_string(),
            })?;
            label_names
                .iter()
                .position(|l| l == text)
                .ok_or_else(|| EncodeError::UnknownLabel {
                    row: ri,
                    label: text.to_string(),
                })
        })
        .collect()
}

/// Learns vocabularies and scaling ranges from `train`. Call once on the
/// training split only.
pub fn fit_encoder(train: &RawTable) -> Result<FittedEncoder, EncodeError> {
    if train.rows.is_empty() {
        return Err(EncodeError::Empty);
    }
    train
        .schema
        .label_column()
        .ok_or(EncodeError::NoLabelColumn)?;
    let steps = build_steps(train)?;
    let width: usize = steps.iter().map(FeatureStep::width).sum();

    let mut feature_names = Vec::with_capacity(width);
    for step in &steps {
        match step {
            FeatureStep::Numeric { name, .. } | FeatureStep::Ip { name, .. } => {
                feature_names.push(name.clone());
            }
            FeatureStep::OneHot { name, vocab, .. } => {
                for v in vocab {
                    feature_names.push(format!("{name}={v}"));
                }
            }
        }
    }

    let mut normalizer = vec![(f64::INFINITY, f64::NEG_INFINITY); width];
    let mut raw = Vec::with_capacity(width);
    for (ri, row) in train.rows.iter().enumerate() {
        raw.clear();
        expand_row(row, ri, &steps, &mut raw)?;
        for (j, &v) in raw.iter().enumerate() {
            let (min, max) = &mut normalizer[j];
            *min = min.min(v);
            *max = max.max(v);
        }
    }

    Ok(FittedEncoder {
        steps,
        normalizer,
        feature_names,
        label_names: train.schema.label_names.clone(),
    })
}

/// Transforms a cleaned table with an already-fitted encoder.
pub fn encode_with(
    table: &RawTable,
    enc: &FittedEncoder,
) -> Result<EncodedDataset, EncodeError> {
    let n_features = enc.num_features();
    let labels = labels_of(table, &enc.label_names)?;
    let mut matrix = Vec::with_capacity(table.rows.len() * n_features);
    let mut raw = Vec::with_capacity(n_features);
    for (ri, row) in table.rows.iter().enumerate() {
        raw.clear();
        expand_row(row, ri, &enc.steps, &mut raw)?;
        for (j, &v) in raw.iter().enumerate() {
            let (min, max) = enc.normalizer[j];
            let scaled = if max > min { (v - min) / (max - min) } else { 0.0 };
            matrix.push(scaled.clamp(0.0, 1.0));
        }
    }
    Ok(EncodedDataset::new(
        matrix,
        n_features,
        labels,
        enc.label_names.clone(),
        enc.feature_names.clone(),
    ))
}

/// Fits on `train`, encodes both splits with the training statistics.
pub fn fit_and_encode(
    train: &RawTable,
    test: &RawTable,
) -> Result<(EncodedDataset, EncodedDataset, FittedEncoder), EncodeError> {
    let enc = fit_encoder(train)?;
    let train_enc = encode_with(train, &enc)?;
    let test_enc = encode_with(test, &enc)?;
    Ok((train_enc, test_enc, enc))
}
