use serde::{Deserialize, Serialize};

use super::Classifier;
use crate::dataset::{Dataset, MoistureClass};
use crate::error::Result;
use crate::nn::softmax;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LogRegConfig {
    pub l2: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        Self {
            l2: 1.0,
            tol: 1e-6,
            max_iter: 5000,
        }
    }
}

/// Multinomial softmax regression.
#[derive(Debug, Clone, PartialEq)]
pub struct LogReg {
    /// `classes × dim`, row-major.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    dim: usize,
}

impl LogReg {
    pub fn zeros(dim: usize, classes: usize) -> Self {
        Self {
            weights: vec![0.0; dim * classes],
            biases: vec![0.0; classes],
            dim,
        }
    }

    fn logits(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.dim.max(1))
            .zip(&self.biases)
            .map(|(w, b)| w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + b)
            .collect()
    }

    /// Full-batch gradient descent on mean cross-entropy plus
    /// `l2 / (2n) · ‖W‖²` (biases unpenalized). The step is `1/L` for the
    /// objective's Lipschitz bound, so every step decreases the loss.
    pub fn fit(xs: &[Vec<f64>], ys: &[usize], classes: usize, cfg: &LogRegConfig) -> Self {
        let n = xs.len() as f64;
        let dim = xs[0].len();
        let mut model = Self::zeros(dim, classes);
        let mean_sq: f64 = xs.iter().map(|x| x.iter().map(|v| v * v).sum::<f64>() + 1.0).sum::<f64>() / n;
        let lipschitz = 0.5 * mean_sq + cfg.l2 / n;
        let step = 1.0 / lipschitz;

        let mut gw = vec![0.0; model.weights.len()];
        let mut gb = vec![0.0; classes];
        for _ in 0..cfg.max_iter {
            gw.iter_mut().for_each(|g| *g = 0.0);
            gb.iter_mut().for_each(|g| *g = 0.0);
            for (x, &y) in xs.iter().zip(ys) {
                let mut p = softmax(&model.logits(x));
                p[y] -= 1.0;
                for (c, &d) in p.iter().enumerate() {
                    gb[c] += d / n;
                    for (g, xv) in gw[c * dim..(c + 1) * dim].iter_mut().zip(x) {
                        *g += d * xv / n;
                    }
                }
            }
            for (g, w) in gw.iter_mut().zip(&model.weights) {
                *g += cfg.l2 / n * w;
            }
            let norm = gw.iter().chain(&gb).map(|g| g * g).sum::<f64>().sqrt();
            if norm < cfg.tol {
                break;
            }
            model.weights.iter_mut().zip(&gw).for_each(|(w, g)| *w -= step * g);
            model.biases.iter_mut().zip(&gb).for_each(|(b, g)| *b -= step * g);
        }
        model
    }
}

impl Classifier for LogReg {
    fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        softmax(&self.logits(x))
    }
}

pub fn fit_logreg(train: &Dataset, cfg: &LogRegConfig) -> Result<LogReg> {
    let ys = train.label_indices()?;
    let xs: Vec<Vec<f64>> = train.samples().iter().map(|s| s.features.clone()).collect();
    Ok(LogReg::fit(&xs, &ys, MoistureClass::COUNT, cfg))
}
