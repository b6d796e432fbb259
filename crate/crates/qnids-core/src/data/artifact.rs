//! Versioned binary container for a preprocessed train/test pair.
//!
//! Layout (all integers little-endian):
//! magic "QNDS", version u32, label names, feature names (u64 count, then
//! length-prefixed UTF-8), then for each split: row count u64, labels as
//! u64, and the row-major f64 feature matrix. Loading validates magic,
//! version, label ranges, and finiteness, and reports truncation
//! distinctly from corruption.

use super::encode::EncodedDataset;
use crate::binio::{ReadLe, WriteLe, MAX_ELEMENTS};
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;
use thiserror::Error;

const MAGIC: &[u8; 4] = b"QNDS";
const VERSION: u32 = 1;
const MAX_NAME_BYTES: usize = 1 << 16;
const MAX_NAMES: u64 = 1 << 24;

#[derive(Debug, Error)]
pub enum DatasetFileError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("not a dataset file (magic {found:?})")]
    BadMagic { found: [u8; 4] },
    #[error("dataset format version {found} not supported (this build reads {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },
    #[error("file ends before the declared data")]
    Truncated,
    #[error("corrupt dataset file: {0}")]
    Corrupt(String),
}

fn map_eof(e: io::Error) -> DatasetFileError {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        DatasetFileError::Truncated
    } else {
        DatasetFileError::Io(e)
    }
}

/// A train/test pair with shared vocabulary, as written by preprocessing.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetArtifact {
    pub train: EncodedDataset,
    pub test: EncodedDataset,
}

impl DatasetArtifact {
    pub fn new(train: EncodedDataset, test: EncodedDataset) -> Self {
        assert_eq!(
            train.label_names, test.label_names,
            "splits must share label names"
        );
        assert_eq!(
            train.feature_names, test.feature_names,
            "splits must share feature names"
        );
        Self { train, test }
    }

    pub fn save(&self, path: &Path) -> Result<(), DatasetFileError> {
        let file = File::create(path)?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<(), DatasetFileError> {
        w.write_all(MAGIC)?;
        w.put_u32(VERSION)?;
        write_names(w, &self.train.label_names)?;
        write_names(w, &self.train.feature_names)?;
        write_split(w, &self.train)?;
        write_split(w, &self.test)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, DatasetFileError> {
        let file = File::open(path)?;
        let mut r = BufReader::new(file);
        Self::read_from(&mut r)
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self, DatasetFileError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(map_eof)?;
        if &magic != MAGIC {
            return Err(DatasetFileError::BadMagic { found: magic });
        }
        let version = r.take_u32().map_err(map_eof)?;
        if version != VERSION {
            return Err(DatasetFileError::UnsupportedVersion {
                found: version,
                supported: VERSION,
            });
        }
        let label_names = read_names(r, "label names")?;
        if label_names.is_empty() {
            return Err(DatasetFileError::Corrupt("no label names".into()));
        }
        let feature_names = read_names(r, "feature names")?;
        if feature_names.is_empty() {
            return Err(DatasetFileError::Corrupt("no feature names".into()));
        }
        let train = read_split(r, &label_names, &feature_names)?;
        let test = read_split(r, &label_names, &feature_names)?;
        Ok(Self { train, test })
    }
}

fn write_names<W: Write>(w: &mut W, names: &[String]) -> Result<(), DatasetFileError> {
    w.put_u64(names.len() as u64)?;
    for n in names {
        w.put_str(n)?;
    }
    Ok(())
}

fn read_names<R: Read>(r: &mut R, what: &str) -> Result<Vec<String>, DatasetFileError> {
    let count = r.take_u64().map_err(map_eof)?;
    if count > MAX_NAMES {
        return Err(DatasetFileError::Corrupt(format!(
            "{what}: implausible count {count}"
        )));
    }
    let mut names = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let s = r
            .take_str(MAX_NAME_BYTES)
            .map_err(map_eof)
            .map_err(|e| match e {
                DatasetFileError::Io(inner)
                    if inner.kind() == io::ErrorKind::InvalidData =>
                {
                    DatasetFileError::Corrupt(format!("{what}: {inner}"))
                }
                other => other,
            })?;
        names.push(s);
    }
    Ok(names)
}

fn write_split<W: Write>(w: &mut W, data: &EncodedDataset) -> Result<(), DatasetFileError> {
    w.put_u64(data.n_rows() as u64)?;
    for &l in data.labels() {
        w.put_u64(l as u64)?;
    }
    for &v in data.matrix() {
        w.put_f64(v)?;
    }
    Ok(())
}

fn read_split<R: Read>(
    r: &mut R,
    label_names: &[String],
    feature_names: &[String],
) -> Result<EncodedDataset, DatasetFileError> {
    let n_rows = r.take_u64().map_err(map_eof)? as usize;
    let n_features = feature_names.len();
    let elements = (n_rows as u64).saturating_mul(n_features as u64);
    if elements > MAX_ELEMENTS as u64 {
        return Err(DatasetFileError::Corrupt(format!(
            "implausible matrix size {n_rows} x {n_features}"
        )));
    }
    let mut labels = Vec::with_capacity(n_rows);
    for _ in 0..n_rows {
        let l = r.take_u64().map_err(map_eof)? as usize;
        if l >= label_names.len() {
            return Err(DatasetFileError::Corrupt(format!(
                "label index {l} out of range for {} classes",
                label_names.len()
            )));
        }
        labels.push(l);
    }
    let mut matrix = Vec::with_capacity(elements as usize);
    for _ in 0..elements {
        let v = r.take_f64().map_err(map_eof)?;
        if !v.is_finite() {
            return Err(DatasetFileError::Corrupt("non-finite feature value".into()));
        }
        matrix.push(v);
    }
    Ok(EncodedDataset::new(
        matrix,
        n_features,
        labels,
        label_names.to_vec(),
        feature_names.to_vec(),
    ))
}
