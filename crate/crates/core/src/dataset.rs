//! Samples, datasets and feature standardization.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};

/// The three moisture classes; their index is the model output position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MoistureClass {
    Dry,
    Medium,
    Wet,
}

impl MoistureClass {
    pub const ALL: [MoistureClass; 3] = [MoistureClass::Dry, MoistureClass::Medium, MoistureClass::Wet];
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MoistureClass::Dry => "Dry",
            MoistureClass::Medium => "Medium",
            MoistureClass::Wet => "Wet",
        }
    }
}

impl fmt::Display for MoistureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MoistureClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Argument(format!("unknown moisture class '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub features: Vec<f64>,
    pub label: Option<MoistureClass>,
    pub domain: String,
}

/// Samples sharing one feature schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    schema: Vec<String>,
    samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(schema: Vec<String>, samples: Vec<Sample>) -> Result<Self> {
        let mut ids = HashSet::new();
        for s in &samples {
            if s.features.len() != schema.len() {
                return arg(format!(
                    "sample '{}' has {} features, schema has {}",
                    s.id,
                    s.features.len(),
                    schema.len()
                ));
            }
            if !ids.insert(s.id.as_str()) {
                return arg(format!("duplicate sample id '{}'", s.id));
            }
            if let Some(v) = s.features.iter().find(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!("sample '{}' has non-finite feature {v}", s.id)));
            }
        }
        Ok(Self { schema, samples })
    }

    /// Builds a labeled dataset from raw rows; ids are `{domain}_{index}`.
    pub fn from_rows(
        schema: Vec<String>,
        rows: &[Vec<f64>],
        labels: &[Option<MoistureClass>],
        domain: &str,
    ) -> Result<Self> {
        if rows.len() != labels.len() {
            return arg("row and label counts differ");
        }
        let samples = rows
            .iter()
            .zip(labels)
            .enumerate()
            .map(|(i, (r, &label))| Sample {
                id: format!("{domain}_{i}"),
                features: r.clone(),
                label,
                domain: domain.to_string(),
            })
            .collect();
        Self::new(schema, samples)
    }

    pub fn schema(&self) -> &[String] {
        &self.schema
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.schema.len()
    }

    pub fn features(&self) -> Vec<&[f64]> {
        self.samples.iter().map(|s| s.features.as_slice()).collect()
    }

    /// Labels as class indices; fails if any sample is unlabeled.
    pub fn label_indices(&self) -> Result<Vec<usize>> {
        self.samples
            .iter()
            .map(|s| {
                s.label
                    .map(MoistureClass::index)
                    .ok_or_else(|| Error::Argument(format!("sample '{}' has no label", s.id)))
            })
            .collect()
    }

    pub fn is_fully_labeled(&self) -> bool {
        self.samples.iter().all(|s| s.label.is_some())
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
        }
    }

    /// Same samples with every label removed.
    pub fn without_labels(&self) -> Dataset {
        let mut d = self.clone();
        d.samples.iter_mut().for_each(|s| s.label = None);
        d
    }

    pub fn map_features(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Dataset {
        let mut d = self.clone();
        d.samples.iter_mut().for_each(|s| s.features = f(&s.features));
        d
    }
}

/// Per-feature mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit<'a>(rows: impl IntoIterator<Item = &'a [f64]>) -> Result<Self> {
        let rows: Vec<&[f64]> = rows.into_iter().collect();
        let Some(first) = rows.first() else {
            return arg("cannot fit a standardizer on an empty dataset");
        };
        let d = first.len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for r in &rows {
            mean.iter_mut().zip(r.iter()).for_each(|(m, v)| *m += v);
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for r in &rows {
            for ((s, v), m) in var.iter_mut().zip(r.iter()).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn fit_dataset(ds: &Dataset) -> Result<Self> {
        Self::fit(ds.samples.iter().map(|s| s.features.as_slice()))
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn apply(&self, ds: &Dataset) -> Dataset {
        ds.map_features(|x| self.transform(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(rows: &[&[f64]]) -> Dataset {
        let schema = (0..rows[0].len()).map(|i| format!("f{i}")).collect();
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        Dataset::from_rows(schema, &rows, &vec![None; rows.len()], "d").unwrap()
    }

    #[test]
    fn standardize_column() {
        let d = ds(&[&[1.0, 5.0], &[2.0, 5.0], &[3.0, 5.0]]);
        let st = Standardizer::fit_dataset(&d).unwrap();
        let t = st.apply(&d);
        let col: Vec<f64> = t.samples().iter().map(|s| s.features[0]).collect();
        let e = 1.224_744_871_391_589;
        assert!((col[0] + e).abs() < 1e-12 && col[1].abs() < 1e-12 && (col[2] - e).abs() < 1e-12);
        assert!(t.samples().iter().all(|s| s.features[1] == 0.0));
        assert_eq!(st.std[1], 1.0);
        // not idempotent
        assert_ne!(st.apply(&t), t);
    }

    #[test]
    fn empty_fit_fails() {
        assert!(Standardizer::fit(std::iter::empty()).is_err());
    }

    #[test]
    fn dataset_validation() {
        let s = |id: &str, n: usize| Sample {
            id: id.into(),
            features: vec![0.0; n],
            label: None,
            domain: "x".into(),
        };
        assert!(Dataset::new(vec!["a".into()], vec![s("1", 1), s("1", 1)]).is_err());
        assert!(Dataset::new(vec!["a".into()], vec![s("1", 2)]).is_err());
        assert!(Dataset::new(vec!["a".into()], vec![s("1", 1), s("2", 1)]).is_ok());
    }

    #[test]
    fn class_parsing() {
        assert_eq!("wet".parse::<MoistureClass>().unwrap(), MoistureClass::Wet);
        assert_eq!(MoistureClass::from_index(1), Some(MoistureClass::Medium));
        assert!("damp".parse::<MoistureClass>().is_err());
    }
}
