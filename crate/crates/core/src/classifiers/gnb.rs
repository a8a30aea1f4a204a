use std::f64::consts::PI;

use super::Classifier;
use crate::dataset::{Dataset, MoistureClass};
use crate::error::Result;

/// Gaussian naive Bayes. Every class variance is increased by
/// `1e-9 × (largest per-feature variance of the pooled training data)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNb {
    /// `None` for classes absent from the training data.
    classes: Vec<Option<ClassStats>>,
}

#[derive(Debug, Clone, PartialEq)]
struct ClassStats {
    log_prior: f64,
    mean: Vec<f64>,
    var: Vec<f64>,
}

fn mean_var<'a>(rows: impl Iterator<Item = &'a Vec<f64>> + Clone, dim: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.clone().count() as f64;
    let mut mean = vec![0.0; dim];
    for r in rows.clone() {
        mean.iter_mut().zip(r).for_each(|(m, v)| *m += v / n);
    }
    let mut var = vec![0.0; dim];
    for r in rows {
        for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
            *s += (v - m) * (v - m) / n;
        }
    }
    (mean, var)
}

impl GaussianNb {
    pub fn fit(xs: &[Vec<f64>], ys: &[usize], classes: usize) -> Self {
        let dim = xs[0].len();
        let n = xs.len() as f64;
        let (_, pooled) = mean_var(xs.iter(), dim);
        let max_var = pooled.iter().copied().fold(0.0, f64::max);
        let epsilon = if max_var > 0.0 { 1e-9 * max_var } else { 1e-9 };

        let classes = (0..classes)
            .map(|c| {
                let rows = xs.iter().zip(ys).filter(move |(_, &y)| y == c).map(|(x, _)| x);
                let count = rows.clone().count();
                (count > 0).then(|| {
                    let (mean, mut var) = mean_var(rows, dim);
                    var.iter_mut().for_each(|v| *v += epsilon);
                    ClassStats {
                        log_prior: (count as f64 / n).ln(),
                        mean,
                        var,
                    }
                })
            })
            .collect();
        Self { classes }
    }
}

impl Classifier for GaussianNb {
    fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let log_post: Vec<Option<f64>> = self
            .classes
            .iter()
            .map(|c| {
                c.as_ref().map(|c| {
                    c.log_prior
                        + c.mean
                            .iter()
                            .zip(&c.var)
                            .zip(x)
                            .map(|((m, v), x)| -0.5 * (2.0 * PI * v).ln() - (x - m) * (x - m) / (2.0 * v))
                            .sum::<f64>()
                })
            })
            .collect();
        let max = log_post.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut p: Vec<f64> = log_post
            .iter()
            .map(|l| l.map_or(0.0, |l| (l - max).exp()))
            .collect();
        let sum: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= sum);
        p
    }
}

pub fn fit_gnb(train: &Dataset) -> Result<GaussianNb> {
    let ys = train.label_indices()?;
    let xs: Vec<Vec<f64>> = train.samples().iter().map(|s| s.features.clone()).collect();
    Ok(GaussianNb::fit(&xs, &ys, MoistureClass::COUNT))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_gaussians() {
        let xs: Vec<Vec<f64>> = [-0.5, 0.0, 0.5, 9.5, 10.0, 10.5].iter().map(|&v| vec![v]).collect();
        let m = GaussianNb::fit(&xs, &[0, 0, 0, 1, 1, 1], 3);
        assert!(m.predict_proba(&[0.0])[0] > 0.99);
        assert!(m.predict_proba(&[10.0])[1] > 0.99);
        assert_eq!(m.predict_proba(&[0.0])[2], 0.0);
    }

    #[test]
    fn midpoint_is_even() {
        let xs: Vec<Vec<f64>> = [-1.0, -3.0, 1.0, 3.0].iter().map(|&v| vec![v]).collect();
        let p = GaussianNb::fit(&xs, &[0, 0, 1, 1], 2).predict_proba(&[0.0]);
        assert!((p[0] - 0.5).abs() < 1e-9 && (p[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn identical_classes_give_priors() {
        let xs: Vec<Vec<f64>> = [1.0, 2.0, 1.0, 2.0, 1.0, 2.0].iter().map(|&v| vec![v]).collect();
        let p = GaussianNb::fit(&xs, &[0, 0, 1, 1, 1, 1], 2).predict_proba(&[1.7]);
        assert!((p[0] - 1.0 / 3.0).abs() < 1e-9);
        assert!((p[1] - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn constant_features_stay_finite() {
        let xs = vec![vec![1.0], vec![1.0], vec![1.0]];
        let p = GaussianNb::fit(&xs, &[0, 1, 1], 2).predict_proba(&[1.0]);
        assert!(p.iter().all(|v| v.is_finite()));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
