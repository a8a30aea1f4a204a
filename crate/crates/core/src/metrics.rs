//! Confusion matrices and accuracy / precision / recall / F1.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let c = counts.len();
        if c == 0 || counts.iter().any(|r| r.len() != c) {
            return arg("confusion matrix must be square and non-empty");
        }
        Ok(Self { classes: c, counts })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Plain-text table with the given class names.
    pub fn render(&self, names: &[&str]) -> String {
        let width = names
            .iter()
            .map(|n| n.len())
            .chain(self.counts.iter().flatten().map(|c| c.to_string().len()))
            .max()
            .unwrap_or(1)
            .max(4);
        let mut out = String::new();
        let _ = write!(out, "{:>w$} |", "t\\p", w = width);
        for n in names {
            let _ = write!(out, " {n:>width$}");
        }
        out.push('\n');
        out.push_str(&"-".repeat(width + 2 + (width + 1) * names.len()));
        out.push('\n');
        for (n, row) in names.iter().zip(&self.counts) {
            let _ = write!(out, "{n:>width$} |");
            for c in row {
                let _ = write!(out, " {c:>width$}");
            }
            out.push('\n');
        }
        out
    }
}

pub fn confusion(y_true: &[usize], y_pred: &[usize], classes: usize) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return arg(format!(
            "{} true labels but {} predictions",
            y_true.len(),
            y_pred.len()
        ));
    }
    let mut counts = vec![vec![0u64; classes]; classes];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t >= classes || p >= classes {
            return arg(format!("label out of range for {classes} classes: ({t}, {p})"));
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { classes, counts })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    pub support: Vec<u64>,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// One-vs-rest metrics per class, support-weighted averages and accuracy.
/// Any 0/0 is taken as 0.
pub fn metrics(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    let total = cm.total();
    if total == 0 {
        return arg("cannot compute metrics of an empty confusion matrix");
    }
    let c = cm.classes;
    let mut precision = Vec::with_capacity(c);
    let mut recall = Vec::with_capacity(c);
    let mut f1 = Vec::with_capacity(c);
    let mut support = Vec::with_capacity(c);
    let mut trace = 0;
    for k in 0..c {
        let tp = cm.counts[k][k];
        let row: u64 = cm.counts[k].iter().sum();
        let col: u64 = cm.counts.iter().map(|r| r[k]).sum();
        trace += tp;
        let p = ratio(tp, col);
        let r = ratio(tp, row);
        precision.push(p);
        recall.push(r);
        f1.push(if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 });
        support.push(row);
    }
    let weighted = |v: &[f64]| -> f64 {
        v.iter()
            .zip(&support)
            .map(|(m, &s)| m * s as f64)
            .sum::<f64>()
            / total as f64
    };
    // Σ_k recall_k · support_k = Σ_k TP_k, so weighted recall is the accuracy.
    let weighted_recall = ratio(trace, total);
    Ok(MetricsReport {
        accuracy: ratio(trace, total),
        weighted_precision: weighted(&precision),
        weighted_recall,
        weighted_f1: weighted(&f1),
        precision,
        recall,
        f1,
        support,
    })
}
