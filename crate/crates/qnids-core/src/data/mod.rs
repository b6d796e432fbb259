//! Flow-record ingestion: schema-typed CSV loading, rule-based cleaning,
//! train-fitted encoding, stratified splitting, synthetic generation, and
//! the on-disk dataset container.

pub mod artifact;
pub mod clean;
pub mod encode;
pub mod schema;
pub mod split;
pub mod synthetic;
pub mod table;

pub use artifact::{DatasetArtifact, DatasetFileError};
pub use clean::{clean, CleaningReport};
pub use encode::{encode_with, fit_and_encode, fit_encoder, EncodeError, EncodedDataset, FittedEncoder};
pub use schema::{ColumnKind, ColumnSpec, MissingPolicy, Schema};
pub use split::{split_encoded, split_table, stratified_split_indices, SplitError, SplitIndices};
pub use synthetic::{generate_split, SyntheticError, SyntheticSpec};
pub use table::{load_csv, load_csv_reader, Cell, RawTable, TableError};
