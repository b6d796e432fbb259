//! Confusion-matrix evaluation with support-weighted averages.
//!
//! Per-class precision, recall, and F1 are combined by weighting each
//! class by its share of the true labels. A class nothing was predicted
//! as has precision 0 by convention, and the report flags it.

use crate::env::SampleSet;
use crate::nn::{Network, NnError};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no samples to evaluate")]
    Empty,
    #[error("label count {labels} does not match matrix size {classes}")]
    LabelCount { labels: usize, classes: usize },
    #[error(transparent)]
    Nn(#[from] NnError),
}

/// Rows are true classes, columns are predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        assert!(classes > 0, "need at least one class");
        Self {
            classes,
            counts: vec![0; classes * classes],
        }
    }

    pub fn from_counts(classes: usize, counts: Vec<u64>) -> Self {
        assert_eq!(counts.len(), classes * classes, "matrix shape");
        Self { classes, counts }
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn record(&mut self, true_class: usize, predicted: usize) {
        assert!(true_class < self.classes && predicted < self.classes);
        self.counts[true_class * self.classes + predicted] += 1;
    }

    pub fn count(&self, true_class: usize, predicted: usize) -> u64 {
        self.counts[true_class * self.classes + predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Row sum: how many samples truly belong to the class.
    pub fn support(&self, class: usize) -> u64 {
        (0..self.classes).map(|p| self.count(class, p)).sum()
    }

    /// Column sum: how many samples were predicted as the class.
    pub fn predicted(&self, class: usize) -> u64 {
        (0..self.classes).map(|t| self.count(t, class)).sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.classes).map(|c| self.count(c, c)).sum()
    }

    /// CSV with a `true\predicted` header naming every class.
    pub fn to_csv(&self, labels: &[String]) -> String {
        let mut out = String::from("true\\predicted");
        for l in labels {
            let _ = write!(out, ",{l}");
        }
        out.push('\n');
        for (t, l) in labels.iter().enumerate() {
            let _ = write!(out, "{l}");
            for p in 0..self.classes {
                let _ = write!(out, ",{}", self.count(t, p));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub support: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// True when nothing was predicted as this class, making precision 0
    /// by convention rather than by measurement.
    pub undefined_precision: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub accuracy: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    pub per_class: Vec<ClassMetrics>,
    pub confusion: ConfusionMatrix,
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "accuracy:           {:.6}", self.accuracy);
        let _ = writeln!(out, "weighted precision: {:.6}", self.weighted_precision);
        let _ = writeln!(out, "weighted recall:    {:.6}", self.weighted_recall);
        let _ = writeln!(out, "weighted f1:        {:.6}", self.weighted_f1);
        let _ = writeln!(
            out,
            "{:<20} {:>8} {:>10} {:>10} {:>10}",
            "class", "support", "precision", "recall", "f1"
        );
        for c in &self.per_class {
            let mark = if c.undefined_precision { "*" } else { "" };
            let _ = writeln!(
                out,
                "{:<20} {:>8} {:>9.6}{} {:>10.6} {:>10.6}",
                c.label, c.support, c.precision, mark, c.recall, c.f1
            );
        }
        if self.per_class.iter().any(|c| c.undefined_precision) {
            let _ = writeln!(out, "* no sample was predicted as this class");
        }
        out
    }
}

/// Derives every metric from a filled confusion matrix.
pub fn report_from_confusion(
    matrix: &ConfusionMatrix,
    labels: &[String],
) -> Result<EvaluationReport, MetricsError> {
    if labels.len() != matrix.classes() {
        return Err(MetricsError::LabelCount {
            labels: labels.len(),
            classes: matrix.classes(),
        });
    }
    let total = matrix.total();
    if total == 0 {
        return Err(MetricsError::Empty);
    }
    let mut per_class = Vec::with_capacity(matrix.classes());
    let mut weighted_precision = 0.0;
    let mut weighted_recall = 0.0;
    let mut weighted_f1 = 0.0;
    for (c, label) in labels.iter().enumerate() {
        let tp = matrix.count(c, c) as f64;
        let support = matrix.support(c);
        let predicted = matrix.predicted(c);
        let undefined_precision = predicted == 0;
        let precision = if predicted > 0 { tp / predicted as f64 } else { 0.0 };
        let recall = if support > 0 { tp / support as f64 } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        let weight = support as f64 / total as f64;
        weighted_precision += weight * precision;
        weighted_recall += weight * recall;
        weighted_f1 += weight * f1;
        per_class.push(ClassMetrics {
            label: label.clone(),
            support,
            precision,
            recall,
            f1,
            undefined_precision,
        });
    }
    Ok(EvaluationReport {
        accuracy: matrix.correct() as f64 / total as f64,
        weighted_precision,
        weighted_recall,
        weighted_f1,
        per_class,
        confusion: matrix.clone(),
    })
}

/// Runs the network greedily over a dataset and scores the predictions.
pub fn evaluate<D: SampleSet>(
    net: &Network,
    data: &D,
    labels: &[String],
) -> Result<EvaluationReport, MetricsError> {
    if data.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut matrix = ConfusionMatrix::new(labels.len());
    for i in 0..data.len() {
        let q = net.predict(data.features(i))?;
        matrix.record(data.label(i), crate::agent::argmax(&q));
    }
    report_from_confusion(&matrix, labels)
}
