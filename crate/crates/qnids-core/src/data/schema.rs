//! Column descriptions for the supported flow-record layouts.

use serde::{Deserialize, Serialize};

/// How a raw column participates in cleaning and encoding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    /// Parsed as f64 and min-max normalized.
    Numeric,
    /// One-hot encoded against the training vocabulary.
    Categorical,
    /// Dotted-quad IPv4 mapped to its u32 value, then normalized.
    IpAddress,
    /// Numeric port; rows with non-numeric values here are dropped.
    Port,
    /// The class column.
    Label,
    /// Present in the file but excluded from features and missing-value
    /// checks (identifiers, alternate labels).
    Ignored,
}

/// Cleaning policy for absent or malformed cells in one column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    /// Leave the cell missing; the row-level missing-value pass drops it.
    DropRow,
    /// Replace with the mean of the column's present numeric values.
    ImputeMean,
    /// Replace with a fixed value.
    MapToValue(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    pub missing: MissingPolicy,
}

impl ColumnSpec {
    fn new(name: &str, kind: ColumnKind) -> Self {
        Self {
            name: name.into(),
            kind,
            missing: MissingPolicy::DropRow,
        }
    }
}

/// Ordered column layout plus the label vocabulary kept after cleaning.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSpec>,
    /// Classes retained by the label filter, in canonical order; rows with
    /// any other label are dropped. Order defines the class indices.
    pub label_names: Vec<String>,
    /// Feature columns removed wholesale during cleaning.
    pub drop_columns: Vec<String>,
    /// Whether the raw CSV carries a header row.
    pub has_header: bool,
}

impl Schema {
    pub fn label_column(&self) -> Option<usize> {
        self.columns.iter().position(|c| c.kind == ColumnKind::Label)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    /// The 49-column UNSW-NB15 CSV layout (no header row in the published
    /// part files). Six retained classes; the binary indicator column is
    /// carried but ignored, and `is_ftp_login` is dropped wholesale.
    pub fn unsw_nb15() -> Self {
        use ColumnKind::*;
        let mut columns = vec![
            ColumnSpec::new("srcip", IpAddress),
            ColumnSpec::new("sport", Port),
            ColumnSpec::new("dstip", IpAddress),
            ColumnSpec::new("dsport", Port),
            ColumnSpec::new("proto", Categorical),
            ColumnSpec::new("state", Categorical),
        ];
        for name in [
            "dur", "sbytes", "dbytes", "sttl", "dttl", "sloss", "dloss",
        ] {
            columns.push(ColumnSpec::new(name, Numeric));
        }
        columns.push(ColumnSpec::new("service", Categorical));
        for name in [
            "sload", "dload", "spkts", "dpkts", "swin", "dwin", "stcpb", "dtcpb", "smeansz",
            "dmeansz", "trans_depth", "res_bdy_len", "sjit", "djit", "stime", "ltime", "sintpkt",
            "dintpkt", "tcprtt", "synack", "ackdat", "is_sm_ips_ports",
        ] {
            columns.push(ColumnSpec::new(name, Numeric));
        }
        columns.push(ColumnSpec::new("ct_state_ttl", Numeric));
        columns.push(ColumnSpec {
            name: "ct_flw_http_mthd".into(),
            kind: Numeric,
            missing: MissingPolicy::ImputeMean,
        });
        columns.push(ColumnSpec::new("is_ftp_login", Numeric));
        columns.push(ColumnSpec {
            name: "ct_ftp_cmd".into(),
            kind: Numeric,
            missing: MissingPolicy::MapToValue("7".into()),
        });
        for name in [
            "ct_srv_src", "ct_srv_dst", "ct_dst_ltm", "ct_src_ltm", "ct_src_dport_ltm",
            "ct_dst_sport_ltm", "ct_dst_src_ltm",
        ] {
            columns.push(ColumnSpec::new(name, Numeric));
        }
        columns.push(ColumnSpec {
            name: "attack_cat".into(),
            kind: Label,
            missing: MissingPolicy::MapToValue("Normal".into()),
        });
        columns.push(ColumnSpec::new("label", Ignored));
        Self {
            columns,
            label_names: [
                "Normal", "Fuzzers", "DoS", "Exploits", "Generic", "Reconnaissance",
            ]
            .into_iter()
            .map(String::from)
            .collect(),
            drop_columns: vec!["is_ftp_login".into()],
            has_header: false,
        }
    }

    /// The 38-column BoT-IoT 5% extract layout (header row present).
    /// Identifier, MAC/OUI, and numeric-label columns are ignored; the
    /// `category` column is the label with five classes.
    pub fn bot_iot() -> Self {
        use ColumnKind::*;
        let mut columns = vec![
            ColumnSpec::new("pkSeqID", Ignored),
            ColumnSpec::new("stime", Numeric),
            ColumnSpec::new("flgs", Categorical),
            ColumnSpec::new("flgs_number", Numeric),
            ColumnSpec::new("proto", Categorical),
            ColumnSpec::new("proto_number", Numeric),
            ColumnSpec::new("saddr", IpAddress),
            ColumnSpec::new("sport", Port),
            ColumnSpec::new("daddr", IpAddress),
            ColumnSpec::new("dport", Port),
        ];
        for name in ["pkts", "bytes"] {
            columns.push(ColumnSpec::new(name, Numeric));
        }
        columns.push(ColumnSpec::new("state", Categorical));
        columns.push(ColumnSpec::new("state_number", Numeric));
        columns.push(ColumnSpec::new("ltime", Numeric));
        for name in ["seq", "dur", "mean", "stddev"] {
            columns.push(ColumnSpec::new(name, Numeric));
        }
        columns.push(ColumnSpec::new("smac", Ignored));
        columns.push(ColumnSpec::new("dmac", Ignored));
        for name in ["sum", "min", "max"] {
            columns.push(ColumnSpec::new(name, Numeric));
        }
        columns.push(ColumnSpec::new("soui", Ignored));
        columns.push(ColumnSpec::new("doui", Ignored));
        columns.push(ColumnSpec::new("sco", Ignored));
        columns.push(ColumnSpec::new("dco", Ignored));
        for name in [
            "spkts", "dpkts", "sbytes", "dbytes", "rate", "srate", "drate",
        ] {
            columns.push(ColumnSpec::new(name, Numeric));
        }
        columns.push(ColumnSpec::new("attack", Ignored));
        columns.push(ColumnSpec::new("category", Label));
        columns.push(ColumnSpec::new("subcategory", Ignored));
        Self {
            columns,
            label_names: ["DDoS", "DoS", "Normal", "Theft", "Reconnaissance"]
                .into_iter()
                .map(String::from)
                .collect(),
            drop_columns: vec![],
            has_header: true,
        }
    }

    /// Minimal schema for synthetic or already-numeric CSVs: `features`
    /// numeric columns followed by one label column.
    pub fn numeric(feature_names: &[String], label_names: &[String]) -> Self {
        let mut columns: Vec<ColumnSpec> = feature_names
            .iter()
            .map(|n| ColumnSpec::new(n, ColumnKind::Numeric))
            .collect();
        columns.push(ColumnSpec::new("label", ColumnKind::Label));
        Self {
            columns,
            label_names: label_names.to_vec(),
            drop_columns: vec![],
            has_header: true,
        }
    }
}
