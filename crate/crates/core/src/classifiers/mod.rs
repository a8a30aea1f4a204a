//! Baseline classifiers (kNN, logistic regression, Gaussian naive Bayes,
//! MLP), soft voting and stratified cross-validation.

mod cv;
mod gnb;
mod knn;
mod logreg;
mod mlp;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, MoistureClass};
use crate::error::{arg, Result};

pub use cv::{cross_validate, stratified_kfold, stratified_kfold_labels, CvReport, Fold, FoldReport, MetricSummary};
pub use gnb::{fit_gnb, GaussianNb};
pub use knn::{knn_classify, Knn};
pub use logreg::{fit_logreg, LogReg, LogRegConfig};
pub use mlp::{fit_mlp_classifier, MlpClassifier, MlpConfig};

/// A fitted model producing class probabilities.
pub trait Classifier: Send + Sync {
    fn predict_proba(&self, x: &[f64]) -> Vec<f64>;

    fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.predict_proba(x))
    }
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold(0, |best, (i, &x)| if x > v[best] { i } else { best })
}

/// Averages member probability vectors and picks the argmax.
pub fn soft_vote(probas: &[Vec<f64>]) -> Result<(usize, Vec<f64>)> {
    let Some(first) = probas.first() else {
        return arg("soft vote needs at least one member");
    };
    if probas.iter().any(|p| p.len() != first.len()) {
        return arg("member probability vectors differ in length");
    }
    let n = probas.len() as f64;
    let mean: Vec<f64> = (0..first.len())
        .map(|k| probas.iter().map(|p| p[k]).sum::<f64>() / n)
        .collect();
    Ok((argmax(&mean), mean))
}

/// Hyperparameters of one baseline model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Knn { k: usize },
    Logreg(LogRegConfig),
    Gnb,
    Mlp(MlpConfig),
    Voting { members: Vec<ModelSpec> },
}

impl ModelSpec {
    /// Defaults for a model name: `knn`, `logreg`, `gnb`, `mlp` or `voting`
    /// (logreg + gnb + mlp).
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "knn" => ModelSpec::Knn { k: 5 },
            "logreg" => ModelSpec::Logreg(LogRegConfig::default()),
            "gnb" => ModelSpec::Gnb,
            "mlp" => ModelSpec::Mlp(MlpConfig::default()),
            "voting" => ModelSpec::Voting {
                members: vec![
                    ModelSpec::Logreg(LogRegConfig::default()),
                    ModelSpec::Gnb,
                    ModelSpec::Mlp(MlpConfig::default()),
                ],
            },
            other => return arg(format!("unknown model '{other}'")),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Knn { .. } => "knn",
            ModelSpec::Logreg(_) => "logreg",
            ModelSpec::Gnb => "gnb",
            ModelSpec::Mlp(_) => "mlp",
            ModelSpec::Voting { .. } => "voting",
        }
    }

    /// Fits on raw rows and class indices in `0..classes`.
    pub fn fit(
        &self,
        xs: &[Vec<f64>],
        ys: &[usize],
        classes: usize,
        seed: u64,
    ) -> Result<Box<dyn Classifier>> {
        if xs.is_empty() || xs.len() != ys.len() {
            return arg("training data must be non-empty with one label per row");
        }
        if let Some(y) = ys.iter().find(|&&y| y >= classes) {
            return arg(format!("label {y} out of range for {classes} classes"));
        }
        Ok(match self {
            ModelSpec::Knn { k } => Box::new(Knn::fit(xs, ys, classes, *k)?),
            ModelSpec::Logreg(cfg) => Box::new(LogReg::fit(xs, ys, classes, cfg)),
            ModelSpec::Gnb => Box::new(GaussianNb::fit(xs, ys, classes)),
            ModelSpec::Mlp(cfg) => Box::new(MlpClassifier::fit(xs, ys, classes, cfg, seed)?),
            ModelSpec::Voting { members } => {
                if members.is_empty() {
                    return arg("voting needs at least one member");
                }
                let fitted = members
                    .iter()
                    .enumerate()
                    .map(|(i, m)| m.fit(xs, ys, classes, seed.wrapping_add(i as u64)))
                    .collect::<Result<Vec<_>>>()?;
                Box::new(Voting { members: fitted })
            }
        })
    }

    /// Fits on a labeled dataset over the three moisture classes.
    pub fn fit_dataset(&self, train: &Dataset, seed: u64) -> Result<Box<dyn Classifier>> {
        let ys = train.label_indices()?;
        let xs: Vec<Vec<f64>> = train.samples().iter().map(|s| s.features.clone()).collect();
        self.fit(&xs, &ys, MoistureClass::COUNT, seed)
    }
}

/// Soft-voting ensemble of fitted members.
pub struct Voting {
    members: Vec<Box<dyn Classifier>>,
}

impl Classifier for Voting {
    fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let probas: Vec<Vec<f64>> = self.members.iter().map(|m| m.predict_proba(x)).collect();
        soft_vote(&probas).expect("members agree on class count").1
    }
}
