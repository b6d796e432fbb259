//! Raw tabular data as typed cells, loaded from CSV against a schema.

use super::schema::{ColumnKind, Schema};
use std::fmt;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("csv read failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("row {row} has {found} fields, schema expects {expected}")]
    RowWidth {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("file has no data rows")]
    Empty,
}

/// One parsed cell. Numeric-kind columns that fail to parse become
/// `Missing`; `Port` columns keep the original text so the port-specific
/// drop rule can see it.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Number(f64),
    Text(String),
    Missing,
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Cell::Number(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Number(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Missing => f.write_str(""),
        }
    }
}

/// Parses one raw field according to the column kind. Whitespace is
/// trimmed; empty text means missing everywhere.
pub fn parse_cell(raw: &str, kind: &ColumnKind) -> Cell {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Cell::Missing;
    }
    match kind {
        ColumnKind::Numeric => match trimmed.parse::<f64>() {
            Ok(v) if v.is_finite() => Cell::Number(v),
            _ => Cell::Missing,
        },
        // Ports keep unparseable text (hex junk and similar) so cleaning
        // can drop those rows under the port rule rather than the generic
        // missing-value rule.
        ColumnKind::Port => match trimmed.parse::<f64>() {
            Ok(v) if v.is_finite() => Cell::Number(v),
            _ => Cell::Text(trimmed.to_string()),
        },
        ColumnKind::Categorical | ColumnKind::IpAddress | ColumnKind::Label | ColumnKind::Ignored => {
            Cell::Text(trimmed.to_string())
        }
    }
}

/// Schema-typed rows. Column order always matches `schema.columns`.
#[derive(Debug, Clone)]
pub struct RawTable {
    pub schema: Schema,
    pub rows: Vec<Vec<Cell>>,
}

impl RawTable {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn label_of(&self, row: usize) -> Option<&str> {
        let col = self.schema.label_column()?;
        self.rows[row][col].as_text()
    }

    /// Keeps the rows at `indices`, in the order given.
    pub fn select_rows(&self, indices: &[usize]) -> RawTable {
        RawTable {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }
}

/// Reads a CSV file into typed cells. Every row must match the schema
/// width; a header row is skipped when the schema says one exists.
pub fn load_csv(path: &Path, schema: &Schema) -> Result<RawTable, TableError> {
    let file = std::fs::File::open(path)?;
    load_csv_reader(file, schema)
}

pub fn load_csv_reader<R: std::io::Read>(
    reader: R,
    schema: &Schema,
) -> Result<RawTable, TableError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(schema.has_header)
        .flexible(true)
        .from_reader(reader);
    let expected = schema.num_columns();
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != expected {
            return Err(TableError::RowWidth {
                row: i + 1,
                found: record.len(),
                expected,
            });
        }
        let row: Vec<Cell> = record
            .iter()
            .zip(&schema.columns)
            .map(|(raw, col)| parse_cell(raw, &col.kind))
            .collect();
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(TableError::Empty);
    }
    Ok(RawTable {
        schema: schema.clone(),
        rows,
    })
}
