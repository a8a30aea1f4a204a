//! CSV files exchanged between commands.
//!
//! Labels file: `id,domain,label`. Feature file: `id,domain,label` followed
//! by the feature names of one family in canonical order; `label` may be
//! empty. Floats are written with Rust's shortest round-trip formatting.

use std::fs::File;
use std::path::Path;

use moistkit::{Dataset, Error, Family, MoistureClass, Result, Sample};

const META: [&str; 3] = ["id", "domain", "label"];

#[derive(Debug, Clone, PartialEq)]
pub struct LabelRow {
    pub id: String,
    pub domain: String,
    pub label: Option<MoistureClass>,
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Argument(format!("{}: malformed CSV ({other:?})", path.display())),
    }
}

fn parse_label(path: &Path, line: usize, raw: &str) -> Result<Option<MoistureClass>> {
    if raw.trim().is_empty() {
        return Ok(None);
    }
    raw.parse()
        .map(Some)
        .map_err(|e| Error::Argument(format!("{}:{line}: {e}", path.display())))
}

fn open(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().from_reader(file))
}

fn check_meta(path: &Path, header: &csv::StringRecord) -> Result<()> {
    if header.len() < 3 || header.iter().take(3).ne(META) {
        return Err(Error::Argument(format!(
            "{}: header must start with id,domain,label",
            path.display()
        )));
    }
    Ok(())
}

pub fn read_labels(path: &Path) -> Result<Vec<LabelRow>> {
    let mut reader = open(path)?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    check_meta(path, &header)?;
    reader
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(|e| csv_error(path, e))?;
            Ok(LabelRow {
                id: rec[0].to_string(),
                domain: rec[1].to_string(),
                label: parse_label(path, i + 2, &rec[2])?,
            })
        })
        .collect()
}

pub fn read_features(path: &Path) -> Result<Dataset> {
    let mut reader = open(path)?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    check_meta(path, &header)?;
    let schema: Vec<String> = header.iter().skip(3).map(str::to_string).collect();
    if Family::from_names(&schema).is_none() {
        return Err(Error::Argument(format!(
            "{}: feature columns do not match any known family",
            path.display()
        )));
    }
    let mut samples = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = i + 2;
        let features = rec
            .iter()
            .skip(3)
            .map(|cell| match cell.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Argument(format!(
                    "{}:{line}: '{cell}' is not a finite number",
                    path.display()
                ))),
            })
            .collect::<Result<Vec<f64>>>()?;
        samples.push(Sample {
            id: rec[0].to_string(),
            domain: rec[1].to_string(),
            label: parse_label(path, line, &rec[2])?,
            features,
        });
    }
    Dataset::new(schema, samples)
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

pub fn write_features(path: &Path, ds: &Dataset) -> Result<()> {
    let mut w = writer(path)?;
    let header = META.iter().map(|s| s.to_string()).chain(ds.schema().iter().cloned());
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for s in ds.samples() {
        let meta = [s.id.clone(), s.domain.clone(), s.label.map_or(String::new(), |l| l.to_string())];
        let row = meta.into_iter().chain(s.features.iter().map(|v| v.to_string()));
        w.write_record(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
