use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use moistkit::adapt::{train_adaptmoist, AdaptMoistModel, TrainConfig};
use moistkit::classifiers::{cross_validate, ModelSpec};
use moistkit::metrics::{confusion, metrics, ConfusionMatrix, MetricsReport};
use moistkit::synth::{generate_scenario, Shift};
use moistkit::{load_image, Dataset, Error, Family, MoistureClass, Result, Sample};

use crate::tables::{read_features, read_labels, write_features, write_rows};

const CLASS_NAMES: [&str; 3] = ["Dry", "Medium", "Wet"];

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_model(path: &Path) -> Result<AdaptMoistModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Argument(format!("{}: {e}", path.display())))
}

pub fn synth(out: &Path, shift: &str, per_class: usize, seed: u64) -> Result<()> {
    let shift: Shift = shift.parse()?;
    let scenario = generate_scenario(shift, per_class, seed, out)?;
    println!(
        "shift {shift}, seed {seed}: {} source and {} target images ({per_class} per class) in {}",
        scenario.source.len(),
        scenario.target.len(),
        out.display()
    );
    Ok(())
}

pub fn extract(images: &Path, labels: &Path, family: &str, out: &Path, jobs: usize) -> Result<()> {
    let family: Family = family.parse()?;
    let rows = read_labels(labels)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Argument(format!("cannot start {jobs} worker threads: {e}")))?;
    let samples = pool.install(|| {
        rows.par_iter()
            .map(|row| {
                let path = images.join(format!("{}.png", row.id));
                let features = family.extract(&load_image(&path)?)?.into_values();
                if features.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Numeric(format!("non-finite feature for {}", path.display())));
                }
                Ok(Sample {
                    id: row.id.clone(),
                    domain: row.domain.clone(),
                    label: row.label,
                    features,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let schema = family.names().into_iter().map(str::to_string).collect();
    let ds = Dataset::new(schema, samples)?;
    write_features(out, &ds)?;
    println!("{} rows x {} {} features -> {}", ds.len(), ds.dim(), family.as_str(), out.display());
    Ok(())
}

fn require_labels(ds: &Dataset, path: &Path) -> Result<()> {
    if let Some(s) = ds.samples().iter().find(|s| s.label.is_none()) {
        return Err(Error::Argument(format!(
            "{}: row '{}' has no label",
            path.display(),
            s.id
        )));
    }
    Ok(())
}

pub fn baseline(features: &Path, model: &str, folds: usize, seed: u64, report: &Path) -> Result<()> {
    let spec = ModelSpec::from_name(model)?;
    let ds = read_features(features)?;
    require_labels(&ds, features)?;
    let cv = cross_validate(&ds, &spec, folds, seed)?;
    write_json(report, &cv)?;
    println!("{} | {folds}-fold stratified CV, seed {seed}", spec.name());
    print!("{}", cv.summary_table());
    Ok(())
}

pub fn adapt(source: &Path, target: &Path, cfg: &TrainConfig, model_out: &Path, report: &Path) -> Result<()> {
    let src = read_features(source)?;
    require_labels(&src, source)?;
    let tgt = read_features(target)?.without_labels();
    if src.schema() != tgt.schema() {
        return Err(Error::Argument(format!(
            "feature columns of {} and {} differ",
            source.display(),
            target.display()
        )));
    }
    let (model, rep) = train_adaptmoist(&src, &tgt, cfg)?;
    write_json(model_out, &model)?;
    write_json(report, &rep)?;
    println!("epoch  label_loss  domain_loss  total_loss  ami");
    for r in &rep.records {
        let ami = r.ami.map_or("-".to_string(), |a| format!("{a:.4}"));
        let mark = if r.checkpointed { "  *" } else { "" };
        println!(
            "{:>5}  {:>10.5}  {:>11.5}  {:>10.5}  {ami}{mark}",
            r.epoch, r.label_loss, r.domain_loss, r.total_loss
        );
    }
    println!("best epoch {} (AMI {:.4})", rep.best_epoch, rep.best_ami);
    Ok(())
}

#[derive(Serialize)]
struct EvalReport {
    metrics: MetricsReport,
    confusion: ConfusionMatrix,
}

pub fn eval(model: &Path, features: &Path, report: &Path) -> Result<()> {
    let model = read_model(model)?;
    let ds = read_features(features)?;
    require_labels(&ds, features)?;
    let y_true = ds.label_indices()?;
    let y_pred: Vec<usize> = model.predict(&ds)?.iter().map(|p| p.class.index()).collect();
    let cm = confusion(&y_true, &y_pred, MoistureClass::COUNT)?;
    let m = metrics(&cm)?;
    println!(
        "accuracy {:.4}  weighted precision {:.4}  recall {:.4}  f1 {:.4}",
        m.accuracy, m.weighted_precision, m.weighted_recall, m.weighted_f1
    );
    print!("{}", cm.render(&CLASS_NAMES));
    write_json(report, &EvalReport { metrics: m, confusion: cm })
}

pub fn predict(model: &Path, features: &Path, out: &Path) -> Result<()> {
    let model = read_model(model)?;
    let ds = read_features(features)?;
    let rows: Vec<Vec<String>> = model
        .predict(&ds)?
        .into_iter()
        .zip(ds.samples())
        .map(|(p, s)| {
            let mut row = vec![s.id.clone(), p.class.to_string()];
            row.extend(p.probs.iter().map(|v| v.to_string()));
            row
        })
        .collect();
    write_rows(out, &["id", "predicted", "probDry", "probMedium", "probWet"], &rows)?;
    println!("{} predictions -> {}", rows.len(), out.display());
    Ok(())
}
