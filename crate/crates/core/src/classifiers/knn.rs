use super::Classifier;
use crate::dataset::{Dataset, MoistureClass};
use crate::error::{arg, Result};

/// k-nearest neighbours under Euclidean distance. Probabilities are the
/// class frequencies among the `k` closest training rows; equal distances
/// are ordered by training index.
pub struct Knn {
    xs: Vec<Vec<f64>>,
    ys: Vec<usize>,
    classes: usize,
    k: usize,
}

impl Knn {
    pub fn fit(xs: &[Vec<f64>], ys: &[usize], classes: usize, k: usize) -> Result<Self> {
        if xs.is_empty() {
            return arg("kNN needs a non-empty training set");
        }
        if k == 0 || k > xs.len() {
            return arg(format!("k = {k} invalid for {} training rows", xs.len()));
        }
        Ok(Self {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            classes,
            k,
        })
    }
}

impl Classifier for Knn {
    fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let mut d: Vec<(f64, usize)> = self
            .xs
            .iter()
            .enumerate()
            .map(|(i, r)| (r.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum(), i))
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut p = vec![0.0; self.classes];
        for &(_, i) in &d[..self.k] {
            p[self.ys[i]] += 1.0;
        }
        p.iter_mut().for_each(|v| *v /= self.k as f64);
        p
    }
}

pub fn knn_classify(train: &Dataset, x: &[f64], k: usize) -> Result<Vec<f64>> {
    let ys = train.label_indices()?;
    let xs: Vec<Vec<f64>> = train.samples().iter().map(|s| s.features.clone()).collect();
    Ok(Knn::fit(&xs, &ys, MoistureClass::COUNT, k)?.predict_proba(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> (Vec<Vec<f64>>, Vec<usize>) {
        let xs = vec![
            vec![0.0, 0.0],
            vec![0.5, 0.0],
            vec![0.0, 0.5],
            vec![10.0, 10.0],
            vec![10.5, 10.0],
            vec![10.0, 10.5],
        ];
        (xs, vec![0, 0, 0, 1, 1, 1])
    }

    #[test]
    fn exact_match_k1() {
        let (xs, ys) = blobs();
        let m = Knn::fit(&xs, &ys, 3, 1).unwrap();
        assert_eq!(m.predict_proba(&[10.5, 10.0]), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn nearby_query() {
        let (xs, ys) = blobs();
        let m = Knn::fit(&xs, &ys, 3, 3).unwrap();
        assert_eq!(m.predict(&[1.0, 1.0]), 0);
    }

    #[test]
    fn k_equals_n_gives_priors() {
        let (xs, ys) = blobs();
        let m = Knn::fit(&xs, &ys, 3, 6).unwrap();
        assert_eq!(m.predict_proba(&[3.0, -7.0]), vec![0.5, 0.5, 0.0]);
    }

    #[test]
    fn tie_breaks_by_index() {
        let xs = vec![vec![1.0], vec![-1.0]];
        let m = Knn::fit(&xs, &[2, 1], 3, 1).unwrap();
        assert_eq!(m.predict(&[0.0]), 2);
    }

    #[test]
    fn errors() {
        assert!(Knn::fit(&[], &[], 3, 1).is_err());
        let (xs, ys) = blobs();
        assert!(Knn::fit(&xs, &ys, 3, 7).is_err());
    }
}
