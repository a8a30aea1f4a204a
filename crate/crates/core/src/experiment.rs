//! Source-vs-target experiments on synthetic scenarios: the source-only
//! baseline and the adapted model, evaluated on held-back target labels.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adapt::{train_adaptmoist, TrainConfig};
use crate::classifiers::{cross_validate, ModelSpec};
use crate::dataset::{Dataset, Sample, Standardizer};
use crate::error::Result;
use crate::features::Family;
use crate::metrics::{confusion, metrics};
use crate::synth::{build_scenario, Shift, SyntheticImage};
use crate::MoistureClass;

/// Extracts one feature family from every image, keeping input order.
pub fn feature_dataset(images: &[SyntheticImage], family: Family) -> Result<Dataset> {
    let samples = images
        .par_iter()
        .map(|img| {
            Ok(Sample {
                id: img.id.clone(),
                features: family.extract(&img.image)?.values().to_vec(),
                label: Some(img.class),
                domain: img.domain.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(family.names().iter().map(|s| s.to_string()).collect(), samples)
}

pub fn accuracy(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    Ok(metrics(&confusion(y_true, y_pred, MoistureClass::COUNT)?)?.accuracy)
}

/// Trains `spec` on the standardized source and scores it on the target,
/// standardized with the source statistics.
pub fn source_only_accuracy(source: &Dataset, target: &Dataset, spec: &ModelSpec, seed: u64) -> Result<f64> {
    let std = Standardizer::fit_dataset(source)?;
    let model = spec.fit_dataset(&std.apply(source), seed)?;
    let pred: Vec<usize> = std.apply(target).samples().iter().map(|s| model.predict(&s.features)).collect();
    accuracy(&target.label_indices()?, &pred)
}

/// Trains AdaptMoist with target labels hidden and scores the checkpoint.
pub fn adapted_accuracy(source: &Dataset, target: &Dataset, cfg: &TrainConfig) -> Result<f64> {
    let (model, _) = train_adaptmoist(source, &target.without_labels(), cfg)?;
    let pred: Vec<usize> = model.predict(target)?.iter().map(|p| p.class.index()).collect();
    accuracy(&target.label_indices()?, &pred)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ShiftOutcome {
    pub shift: Shift,
    pub seed: u64,
    pub source_cv_accuracy: f64,
    pub source_only_accuracy: f64,
    pub adapted_accuracy: f64,
}

impl ShiftOutcome {
    pub fn gain(&self) -> f64 {
        self.adapted_accuracy - self.source_only_accuracy
    }
}

/// Generates a scenario, then compares the source-only MLP with
/// AdaptMoist on the target domain.
pub fn shift_experiment(
    shift: Shift,
    per_class: usize,
    family: Family,
    cfg: &TrainConfig,
) -> Result<ShiftOutcome> {
    let scenario = build_scenario(shift, per_class, cfg.seed)?;
    let source = feature_dataset(&scenario.source, family)?;
    let target = feature_dataset(&scenario.target, family)?;
    let mlp = ModelSpec::from_name("mlp")?;
    Ok(ShiftOutcome {
        shift,
        seed: cfg.seed,
        source_cv_accuracy: cross_validate(&source, &mlp, 4, cfg.seed)?.mean.accuracy,
        source_only_accuracy: source_only_accuracy(&source, &target, &mlp, cfg.seed)?,
        adapted_accuracy: adapted_accuracy(&source, &target, cfg)?,
    })
}
