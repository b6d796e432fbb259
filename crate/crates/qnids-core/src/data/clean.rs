//! Rule-based row and column cleaning with an audit report.
//!
//! Passes run in a fixed order: per-column missing-value policies (remap,
//! mean imputation), dropping rows with non-numeric port text, dropping
//! configured columns, dropping rows that still have missing values, and
//! finally keeping only the schema's label classes.

use super::schema::{ColumnKind, MissingPolicy};
use super::table::{parse_cell, Cell, RawTable};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub const RULE_NON_NUMERIC_PORT: &str = "non_numeric_port";
pub const RULE_MISSING_VALUES: &str = "missing_values";
pub const RULE_CLASS_FILTER: &str = "class_filter";

/// What cleaning did, with enough counts to audit it:
/// `rows_in == rows_out + sum(rows_dropped)` always holds.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningReport {
    pub rows_in: u64,
    pub rows_out: u64,
    /// Dropped row counts keyed by rule name.
    pub rows_dropped: BTreeMap<String, u64>,
    pub columns_dropped: Vec<String>,
    /// Cells filled with a column mean, keyed by column.
    pub values_imputed: BTreeMap<String, u64>,
    /// Cells replaced by a fixed value, keyed by column.
    pub values_remapped: BTreeMap<String, u64>,
    /// Rows per retained class, after all drops.
    pub class_counts: BTreeMap<String, u64>,
}

impl CleaningReport {
    pub fn total_dropped(&self) -> u64 {
        self.rows_dropped.values().sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for CleaningReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rows in:  {}", self.rows_in)?;
        writeln!(f, "rows out: {}", self.rows_out)?;
        for (rule, n) in &self.rows_dropped {
            writeln!(f, "dropped ({rule}): {n}")?;
        }
        if !self.columns_dropped.is_empty() {
            writeln!(f, "columns dropped: {}", self.columns_dropped.join(", "))?;
        }
        for (col, n) in &self.values_imputed {
            writeln!(f, "imputed ({col}): {n}")?;
        }
        for (col, n) in &self.values_remapped {
            writeln!(f, "remapped ({col}): {n}")?;
        }
        for (class, n) in &self.class_counts {
            writeln!(f, "class {class}: {n}")?;
        }
        Ok(())
    }
}

fn retain_counted(
    rows: &mut Vec<Vec<Cell>>,
    report: &mut CleaningReport,
    rule: &str,
    keep: impl Fn(&[Cell]) -> bool,
) {
    let before = rows.len();
    rows.retain(|r| keep(r));
    let dropped = (before - rows.len()) as u64;
    if dropped > 0 {
        *report.rows_dropped.entry(rule.to_string()).or_insert(0) += dropped;
    }
}

/// Applies every cleaning rule the table's schema asks for and returns the
/// cleaned table (columns in `drop_columns` removed) plus the audit report.
pub fn clean(table: &RawTable) -> (RawTable, CleaningReport) {
    let mut schema = table.schema.clone();
    let mut rows = table.rows.clone();
    let mut report = CleaningReport {
        rows_in: rows.len() as u64,
        ..CleaningReport::default()
    };

    // Per-column policies. Means are computed over the values present at
    // this point, before any row drops.
    for (ci, col) in schema.columns.iter().enumerate() {
        match &col.missing {
            MissingPolicy::DropRow => {}
            MissingPolicy::MapToValue(value) => {
                let replacement = parse_cell(value, &col.kind);
                let mut n = 0u64;
                for row in rows.iter_mut() {
                    if row[ci].is_missing() {
                        row[ci] = replacement.clone();
                        n += 1;
                    }
                }
                if n > 0 {
                    report.values_remapped.insert(col.name.clone(), n);
                }
            }
            MissingPolicy::ImputeMean => {
                let (sum, count) = rows
                    .iter()
                    .filter_map(|r| r[ci].as_number())
                    .fold((0.0, 0u64), |(s, c), v| (s + v, c + 1));
                if count == 0 {
                    continue;
                }
                let mean = sum / count as f64;
                let mut n = 0u64;
                for row in rows.iter_mut() {
                    if row[ci].is_missing() {
                        row[ci] = Cell::Number(mean);
                        n += 1;
                    }
                }
                if n > 0 {
                    report.values_imputed.insert(col.name.clone(), n);
                }
            }
        }
    }

    // Rows whose port columns hold text that did not parse as a number.
    let port_cols: Vec<usize> = schema
        .columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.kind == ColumnKind::Port)
        .map(|(i, _)| i)
        .collect();
    if !port_cols.is_empty() {
        retain_counted(&mut rows, &mut report, RULE_NON_NUMERIC_PORT, |row| {
            !port_cols.iter().any(|&ci| matches!(row[ci], Cell::Text(_)))
        });
    }

    // Whole-column drops.
    let mut drop_idx: Vec<usize> = schema
        .drop_columns
        .iter()
        .filter_map(|name| schema.column_index(name))
        .collect();
    drop_idx.sort_unstable();
    for &ci in drop_idx.iter().rev() {
        report
            .columns_dropped
            .insert(0, schema.columns[ci].name.clone());
        schema.columns.remove(ci);
        for row in rows.iter_mut() {
            row.remove(ci);
        }
    }
    schema.drop_columns.clear();

    // Addresses that are not dotted-quad IPv4 (v6, junk) cannot be encoded;
    // blank them so the missing-value rule below drops those rows.
    let ip_cols: Vec<usize> = schema
        .columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.kind == ColumnKind::IpAddress)
        .map(|(i, _)| i)
        .collect();
    for row in rows.iter_mut() {
        for &ci in &ip_cols {
            if let Cell::Text(s) = &row[ci] {
                if s.parse::<std::net::Ipv4Addr>().is_err() {
                    row[ci] = Cell::Missing;
                }
            }
        }
    }

    // Rows still missing a value in any column that feeds the features or
    // the label.
    let checked: Vec<usize> = schema
        .columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.kind != ColumnKind::Ignored)
        .map(|(i, _)| i)
        .collect();
    retain_counted(&mut rows, &mut report, RULE_MISSING_VALUES, |row| {
        !checked.iter().any(|&ci| row[ci].is_missing())
    });

    // Label filter and per-class tally.
    if let Some(lc) = schema.label_column() {
        let keep: BTreeSet<&str> = schema.label_names.iter().map(String::as_str).collect();
        retain_counted(&mut rows, &mut report, RULE_CLASS_FILTER, |row| {
            row[lc].as_text().is_some_and(|t| keep.contains(t))
        });
        for row in &rows {
            let label = row[lc].as_text().expect("filtered to known labels");
            *report.class_counts.entry(label.to_string()).or_insert(0) += 1;
        }
    }

    report.rows_out = rows.len() as u64;
    (RawTable { schema, rows }, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::schema::{ColumnSpec, Schema};
    use crate::data::table::load_csv_reader;

    /// One full-width UNSW-style CSV line with selected fields overridden.
    fn unsw_line(overrides: &[(usize, &str)]) -> String {
        let mut fields: Vec<String> = (0..49).map(|_| "0".to_string()).collect();
        fields[0] = "10.0.0.1".into();
        fields[2] = "10.0.0.2".into();
        fields[1] = "1024".into();
        fields[3] = "80".into();
        fields[4] = "tcp".into();
        fields[5] = "FIN".into();
        fields[13] = "http".into();
        fields[47] = "Normal".into();
        for &(i, v) in overrides {
            fields[i] = v.into();
        }
        fields.join(",")
    }

    fn unsw_table(lines: &[String]) -> RawTable {
        let csv = lines.join("\n");
        load_csv_reader(csv.as_bytes(), &Schema::unsw_nb15()).unwrap()
    }

    #[test]
    fn empty_label_becomes_normal() {
        let t = unsw_table(&[unsw_line(&[(47, "")]), unsw_line(&[(47, "DoS")])]);
        let (cleaned, report) = clean(&t);
        assert_eq!(cleaned.label_of(0), Some("Normal"));
        assert_eq!(report.values_remapped.get("attack_cat"), Some(&1));
        assert_eq!(report.class_counts.get("Normal"), Some(&1));
        assert_eq!(report.class_counts.get("DoS"), Some(&1));
    }

    #[test]
    fn mean_imputation_uses_present_values() {
        // ct_flw_http_mthd (index 37): values 1, missing, 3 -> mean 2.
        let t = unsw_table(&[
            unsw_line(&[(37, "1")]),
            unsw_line(&[(37, "")]),
            unsw_line(&[(37, "3")]),
        ]);
        let (cleaned, report) = clean(&t);
        let ci = cleaned.schema.column_index("ct_flw_http_mthd").unwrap();
        assert_eq!(cleaned.rows[1][ci], Cell::Number(2.0));
        assert_eq!(report.values_imputed.get("ct_flw_http_mthd"), Some(&1));
    }

    #[test]
    fn missing_ftp_cmd_maps_to_seven() {
        let t = unsw_table(&[unsw_line(&[(39, "")])]);
        let (cleaned, report) = clean(&t);
        let ci = cleaned.schema.column_index("ct_ftp_cmd").unwrap();
        assert_eq!(cleaned.rows[0][ci], Cell::Number(7.0));
        assert_eq!(report.values_remapped.get("ct_ftp_cmd"), Some(&1));
    }

    #[test]
    fn hex_port_rows_are_dropped() {
        let t = unsw_table(&[unsw_line(&[(1, "0x20205321")]), unsw_line(&[])]);
        let (cleaned, report) = clean(&t);
        assert_eq!(cleaned.num_rows(), 1);
        assert_eq!(report.rows_dropped.get(RULE_NON_NUMERIC_PORT), Some(&1));
    }

    #[test]
    fn ftp_login_column_is_removed() {
        let t = unsw_table(&[unsw_line(&[])]);
        let (cleaned, report) = clean(&t);
        assert_eq!(cleaned.schema.num_columns(), 48);
        assert!(cleaned.schema.column_index("is_ftp_login").is_none());
        assert_eq!(cleaned.rows[0].len(), 48);
        assert_eq!(report.columns_dropped, vec!["is_ftp_login".to_string()]);
        // Label column index shifts down by one after the drop.
        assert_eq!(cleaned.schema.label_column(), Some(46));
    }

    #[test]
    fn rows_with_missing_numerics_are_dropped() {
        let t = unsw_table(&[unsw_line(&[(6, "")]), unsw_line(&[])]);
        let (cleaned, report) = clean(&t);
        assert_eq!(cleaned.num_rows(), 1);
        assert_eq!(report.rows_dropped.get(RULE_MISSING_VALUES), Some(&1));
    }

    #[test]
    fn unknown_classes_are_filtered() {
        let t = unsw_table(&[
            unsw_line(&[(47, "Backdoor")]),
            unsw_line(&[(47, "Worms")]),
            unsw_line(&[(47, "Generic")]),
        ]);
        let (cleaned, report) = clean(&t);
        assert_eq!(cleaned.num_rows(), 1);
        assert_eq!(report.rows_dropped.get(RULE_CLASS_FILTER), Some(&2));
        assert_eq!(report.class_counts.get("Generic"), Some(&1));
    }

    #[test]
    fn report_balances() {
        let t = unsw_table(&[
            unsw_line(&[]),
            unsw_line(&[(1, "bogus")]),
            unsw_line(&[(8, "")]),
            unsw_line(&[(47, "Shellcode")]),
            unsw_line(&[(47, "Exploits")]),
        ]);
        let (_, report) = clean(&t);
        assert_eq!(report.rows_in, 5);
        assert_eq!(report.rows_out, 2);
        assert_eq!(report.rows_in, report.rows_out + report.total_dropped());
        let json = report.to_json();
        let back: CleaningReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn ignored_columns_tolerate_missing() {
        // The trailing binary indicator can be blank without dropping the row.
        let t = unsw_table(&[unsw_line(&[(48, "")])]);
        let (cleaned, _) = clean(&t);
        assert_eq!(cleaned.num_rows(), 1);
    }

    #[test]
    fn non_ipv4_addresses_drop_the_row() {
        let t = unsw_table(&[unsw_line(&[(0, "fe80::1")]), unsw_line(&[])]);
        let (cleaned, report) = clean(&t);
        assert_eq!(cleaned.num_rows(), 1);
        assert_eq!(report.rows_dropped.get(RULE_MISSING_VALUES), Some(&1));
    }

    #[test]
    fn imputation_skips_all_missing_column() {
        let schema = Schema {
            columns: vec![
                ColumnSpec {
                    name: "v".into(),
                    kind: ColumnKind::Numeric,
                    missing: MissingPolicy::ImputeMean,
                },
                ColumnSpec {
                    name: "label".into(),
                    kind: ColumnKind::Label,
                    missing: MissingPolicy::DropRow,
                },
            ],
            label_names: vec!["x".into()],
            drop_columns: vec![],
            has_header: true,
        };
        let t = load_csv_reader("v,label\n,x\n,x\n".as_bytes(), &schema).unwrap();
        let (cleaned, report) = clean(&t);
        // Nothing to average, so the rows fall to the missing-value rule.
        assert_eq!(cleaned.num_rows(), 0);
        assert_eq!(report.rows_dropped.get(RULE_MISSING_VALUES), Some(&2));
        assert!(report.values_imputed.is_empty());
    }
}
