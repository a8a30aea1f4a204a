use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ModelSpec;
use crate::dataset::{Dataset, MoistureClass, Standardizer};
use crate::error::{arg, Result};
use crate::metrics::{confusion, metrics, ConfusionMatrix, MetricsReport};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

/// Stratified k-fold split of class indices. Each class is shuffled with
/// the seeded generator and dealt round-robin over the folds, continuing
/// from where the previous class stopped so that fold sizes stay balanced.
pub fn stratified_kfold_labels(labels: &[usize], k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return arg(format!("need at least 2 folds, got {k}"));
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0usize; labels.len()];
    let mut next = 0;
    for c in 0..classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < k {
            return arg(format!(
                "class {c} has {} samples, fewer than {k} folds",
                members.len()
            ));
        }
        members.shuffle(&mut rng);
        for i in members {
            fold_of[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok((0..k)
        .map(|f| {
            let (validation, train) = (0..labels.len()).partition(|&i| fold_of[i] == f);
            Fold { train, validation }
        })
        .collect())
}

pub fn stratified_kfold(ds: &Dataset, k: usize, seed: u64) -> Result<Vec<Fold>> {
    stratified_kfold_labels(&ds.label_indices()?, k, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricSummary {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl MetricSummary {
    fn from_report(m: &MetricsReport) -> Self {
        Self {
            accuracy: m.accuracy,
            precision: m.weighted_precision,
            recall: m.weighted_recall,
            f1: m.weighted_f1,
        }
    }

    fn as_array(&self) -> [f64; 4] {
        [self.accuracy, self.precision, self.recall, self.f1]
    }

    fn from_array(a: [f64; 4]) -> Self {
        Self {
            accuracy: a[0],
            precision: a[1],
            recall: a[2],
            f1: a[3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FoldReport {
    pub fold: usize,
    /// Rows the standardizer and model were fitted on.
    pub fit_indices: Vec<usize>,
    pub validation_indices: Vec<usize>,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricsReport,
}

/// Cross-validation outcome: per-fold records plus the mean and the
/// population standard deviation of the headline metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CvReport {
    pub model: String,
    pub spec: ModelSpec,
    pub folds: usize,
    pub seed: u64,
    pub per_fold: Vec<FoldReport>,
    pub mean: MetricSummary,
    pub stdev: MetricSummary,
}

impl CvReport {
    /// `mean (stdev)` line per metric.
    pub fn summary_table(&self) -> String {
        let names = ["Accuracy", "Precision", "Recall", "F1-score"];
        let (m, s) = (self.mean.as_array(), self.stdev.as_array());
        names
            .iter()
            .zip(m.iter().zip(s))
            .map(|(n, (m, s))| format!("{n:<10} {m:.3} ({s:.3})\n"))
            .collect()
    }
}

/// Stratified k-fold evaluation. The standardizer is refitted on each
/// training split; fold `f` trains with seed `seed + f`.
pub fn cross_validate(ds: &Dataset, spec: &ModelSpec, k: usize, seed: u64) -> Result<CvReport> {
    let labels = ds.label_indices()?;
    let folds = stratified_kfold_labels(&labels, k, seed)?;
    let per_fold = folds
        .into_iter()
        .enumerate()
        .map(|(f, fold)| {
            let train = ds.subset(&fold.train);
            let std = Standardizer::fit_dataset(&train)?;
            let train = std.apply(&train);
            let model = spec.fit_dataset(&train, seed.wrapping_add(f as u64))?;
            let predicted: Vec<usize> = fold
                .validation
                .iter()
                .map(|&i| model.predict(&std.transform(&ds.samples()[i].features)))
                .collect();
            let truth: Vec<usize> = fold.validation.iter().map(|&i| labels[i]).collect();
            let cm = confusion(&truth, &predicted, MoistureClass::COUNT)?;
            Ok(FoldReport {
                fold: f,
                metrics: metrics(&cm)?,
                confusion: cm,
                fit_indices: fold.train,
                validation_indices: fold.validation,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let rows: Vec<[f64; 4]> = per_fold
        .iter()
        .map(|f| MetricSummary::from_report(&f.metrics).as_array())
        .collect();
    let n = rows.len() as f64;
    let mut mean = [0.0; 4];
    let mut var = [0.0; 4];
    for r in &rows {
        (0..4).for_each(|j| mean[j] += r[j] / n);
    }
    for r in &rows {
        (0..4).for_each(|j| var[j] += (r[j] - mean[j]).powi(2) / n);
    }
    Ok(CvReport {
        model: spec.name().to_string(),
        spec: spec.clone(),
        folds: k,
        seed,
        per_fold,
        mean: MetricSummary::from_array(mean),
        stdev: MetricSummary::from_array(var.map(f64::sqrt)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_per_class_per_fold() {
        let labels: Vec<usize> = (0..12).map(|i| i % 3).collect();
        let folds = stratified_kfold_labels(&labels, 4, 1).unwrap();
        assert_eq!(folds.len(), 4);
        for f in &folds {
            let mut cls: Vec<usize> = f.validation.iter().map(|&i| labels[i]).collect();
            cls.sort_unstable();
            assert_eq!(cls, vec![0, 1, 2]);
        }
    }

    #[test]
    fn folds_partition_and_repeat() {
        let labels: Vec<usize> = (0..23).map(|i| (i * 7) % 3).collect();
        let folds = stratified_kfold_labels(&labels, 4, 5).unwrap();
        let mut all: Vec<usize> = folds.iter().flat_map(|f| f.validation.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
        for f in &folds {
            assert_eq!(f.train.len() + f.validation.len(), 23);
            assert!(f.train.iter().all(|i| !f.validation.contains(i)));
        }
        assert_eq!(folds, stratified_kfold_labels(&labels, 4, 5).unwrap());
    }

    #[test]
    fn small_class_rejected() {
        assert!(stratified_kfold_labels(&[0, 0, 0, 0, 1, 1, 1], 4, 0).is_err());
    }
}
