//! Versioned little-endian weight files. Values are stored as raw f64 bits,
//! so a save/load round trip is bit-exact.

use super::{expected_param_shapes, LayerParams, LayerSpec, Network, NetworkParams, NetworkSpec};
use crate::binio::{self, ReadLe, WriteLe};
use crate::tensor::NumericArray;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;
use thiserror::Error;

pub const WEIGHT_MAGIC: [u8; 4] = *b"QNET";
pub const WEIGHT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum WeightFileError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("not a weight file (magic {found:02x?})")]
    BadMagic { found: [u8; 4] },
    #[error("unsupported weight file version {found} (supported {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },
    #[error("weight file is truncated")]
    Truncated,
    #[error("corrupt weight file: {0}")]
    Corrupt(String),
    #[error("stored parameters do not match the stored spec: {0}")]
    ShapeMismatch(String),
}

fn map_eof(e: io::Error) -> WeightFileError {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        WeightFileError::Truncated
    } else {
        WeightFileError::Io(e)
    }
}

const TAG_CONV: u8 = 0;
const TAG_POOL: u8 = 1;
const TAG_FLATTEN: u8 = 2;
const TAG_DENSE: u8 = 3;
const TAG_RELU: u8 = 4;
const TAG_SOFTMAX: u8 = 5;

impl Network {
    /// Writes spec and parameters. The file fully describes the network, so
    /// `load` needs no side information.
    pub fn save(&self, path: &Path) -> Result<(), WeightFileError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(&WEIGHT_MAGIC)?;
        w.put_u32(WEIGHT_VERSION)?;
        w.put_u64(self.spec.input_length as u64)?;
        w.put_u64(self.spec.input_channels as u64)?;
        w.put_u64(self.spec.layers.len() as u64)?;
        for (layer, params) in self.spec.layers.iter().zip(&self.params.layers) {
            write_layer(&mut w, layer, params.as_ref())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a file written by `save`. Corruption, truncation, version or
    /// shape disagreements each fail with a distinct error; no partially
    /// initialized network is ever returned.
    pub fn load(path: &Path) -> Result<Network, WeightFileError> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(map_eof)?;
        if magic != WEIGHT_MAGIC {
            return Err(WeightFileError::BadMagic { found: magic });
        }
        let version = r.take_u32().map_err(map_eof)?;
        if version != WEIGHT_VERSION {
            return Err(WeightFileError::UnsupportedVersion {
                found: version,
                supported: WEIGHT_VERSION,
            });
        }
        let input_length = take_usize(&mut r)?;
        let input_channels = take_usize(&mut r)?;
        let n_layers = take_usize(&mut r)?;
        if n_layers > 10_000 {
            return Err(WeightFileError::Corrupt(format!(
                "implausible layer count {n_layers}"
            )));
        }
        let mut layers = Vec::with_capacity(n_layers);
        let mut params = Vec::with_capacity(n_layers);
        for _ in 0..n_layers {
            let (spec, lp) = read_layer(&mut r)?;
            layers.push(spec);
            params.push(lp);
        }
        let spec = NetworkSpec {
            input_length,
            input_channels,
            layers,
        };
        let expected = expected_param_shapes(&spec)
            .map_err(|e| WeightFileError::ShapeMismatch(e.to_string()))?;
        for (i, (exp, got)) in expected.iter().zip(&params).enumerate() {
            match (exp, got) {
                (None, None) => {}
                (Some((w, b)), Some(p)) => {
                    if p.weights.shape() != w.as_slice() || p.biases.shape() != b.as_slice() {
                        return Err(WeightFileError::ShapeMismatch(format!(
                            "layer {i}: stored {:?}/{:?}, expected {:?}/{:?}",
                            p.weights.shape(),
                            p.biases.shape(),
                            w,
                            b
                        )));
                    }
                }
                _ => {
                    return Err(WeightFileError::ShapeMismatch(format!(
                        "layer {i}: parameter presence disagrees with layer kind"
                    )))
                }
            }
        }
        Network::from_parts(spec, NetworkParams { layers: params })
            .map_err(|e| WeightFileError::Corrupt(e.to_string()))
    }
}

fn write_layer<W: Write>(
    w: &mut W,
    layer: &LayerSpec,
    params: Option<&LayerParams>,
) -> Result<(), WeightFileError> {
    match *layer {
        LayerSpec::Conv1D {
            filters,
            kernel_width,
        } => {
            w.put_u8(TAG_CONV)?;
            w.put_u64(filters as u64)?;
            w.put_u64(kernel_width as u64)?;
        }
        LayerSpec::MaxPool1D { width } => {
            w.put_u8(TAG_POOL)?;
            w.put_u64(width as u64)?;
        }
        LayerSpec::Flatten => w.put_u8(TAG_FLATTEN)?,
        LayerSpec::Dense { units } => {
            w.put_u8(TAG_DENSE)?;
            w.put_u64(units as u64)?;
        }
        LayerSpec::Relu => w.put_u8(TAG_RELU)?,
        LayerSpec::SoftmaxOutput { units } => {
            w.put_u8(TAG_SOFTMAX)?;
            w.put_u64(units as u64)?;
        }
    }
    match params {
        None => w.put_u8(0)?,
        Some(p) => {
            w.put_u8(1)?;
            w.put_u8(p.trainable as u8)?;
            write_array(w, &p.weights)?;
            write_array(w, &p.biases)?;
        }
    }
    Ok(())
}

fn read_layer<R: Read>(
    r: &mut R,
) -> Result<(LayerSpec, Option<LayerParams>), WeightFileError> {
    let tag = r.take_u8().map_err(map_eof)?;
    let layer = match tag {
        TAG_CONV => LayerSpec::Conv1D {
            filters: take_usize(r)?,
            kernel_width: take_usize(r)?,
        },
        TAG_POOL => LayerSpec::MaxPool1D {
            width: take_usize(r)?,
        },
        TAG_FLATTEN => LayerSpec::Flatten,
        TAG_DENSE => LayerSpec::Dense {
            units: take_usize(r)?,
        },
        TAG_RELU => LayerSpec::Relu,
        TAG_SOFTMAX => LayerSpec::SoftmaxOutput {
            units: take_usize(r)?,
        },
        other => return Err(WeightFileError::Corrupt(format!("unknown layer tag {other}"))),
    };
    let has_params = match r.take_u8().map_err(map_eof)? {
        0 => false,
        1 => true,
        other => {
            return Err(WeightFileError::Corrupt(format!(
                "invalid parameter marker {other}"
            )))
        }
    };
    let params = if has_params {
        let trainable = match r.take_u8().map_err(map_eof)? {
            0 => false,
            1 => true,
            other => {
                return Err(WeightFileError::Corrupt(format!(
                    "invalid trainable flag {other}"
                )))
            }
        };
        let weights = read_array(r)?;
        let biases = read_array(r)?;
        Some(LayerParams {
            weights,
            biases,
            trainable,
        })
    } else {
        None
    };
    Ok((layer, params))
}

fn write_array<W: Write>(w: &mut W, a: &NumericArray) -> Result<(), WeightFileError> {
    w.put_u8(a.shape().len() as u8)?;
    for &d in a.shape() {
        w.put_u64(d as u64)?;
    }
    for &v in a.values() {
        w.put_f64(v)?;
    }
    Ok(())
}

fn read_array<R: Read>(r: &mut R) -> Result<NumericArray, WeightFileError> {
    let ndim = r.take_u8().map_err(map_eof)? as usize;
    if ndim > 8 {
        return Err(WeightFileError::Corrupt(format!(
            "implausible array rank {ndim}"
        )));
    }
    let mut shape = Vec::with_capacity(ndim);
    for _ in 0..ndim {
        shape.push(take_usize(r)?);
    }
    let n: usize = shape.iter().product();
    if n > binio::MAX_ELEMENTS {
        return Err(WeightFileError::Corrupt(format!(
            "implausible element count {n}"
        )));
    }
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        values.push(r.take_f64().map_err(map_eof)?);
    }
    Ok(NumericArray::new(shape, values))
}

fn take_usize<R: Read>(r: &mut R) -> Result<usize, WeightFileError> {
    let v = r.take_u64().map_err(map_eof)?;
    usize::try_from(v).map_err(|_| WeightFileError::Corrupt(format!("value {v} overflows usize")))
}
