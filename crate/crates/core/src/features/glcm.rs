//! Gray-level co-occurrence matrices and the 13 Haralick statistics.

use super::{neg_xlnx, FeatureVector};
use crate::error::{arg, Result};
use crate::image_io::{quantize, GrayImage, QuantizedImage};

pub const HARALICK_LEVELS: usize = 32;

/// Distance-1 offsets `(dx, dy)` for 0°, 45°, 90° and 135°.
pub const HARALICK_OFFSETS: [(isize, isize); 4] = [(1, 0), (1, 1), (0, 1), (-1, 1)];

pub const HARALICK_NAMES: [&str; 13] = [
    "Haralick_ASM",
    "Haralick_Contrast",
    "Haralick_Correlation",
    "Haralick_SumOfSquaresVariance",
    "Haralick_InverseDifferenceMoment",
    "Haralick_SumAverage",
    "Haralick_SumVariance",
    "Haralick_SumEntropy",
    "Haralick_Entropy",
    "Haralick_DifferenceVariance",
    "Haralick_DifferenceEntropy",
    "Haralick_InformationMeasureOfCorrelation1",
    "Haralick_InformationMeasureOfCorrelation2",
];

/// Symmetric, normalized co-occurrence matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Glcm {
    levels: usize,
    entries: Vec<f64>,
}

impl Glcm {
    pub fn levels(&self) -> usize {
        self.levels
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.levels + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

/// Counts every in-bounds pair `(p, p + (dx, dy))` in both orders and
/// normalizes by the total.
pub fn glcm(q: &QuantizedImage, dx: isize, dy: isize) -> Result<Glcm> {
    if dx == 0 && dy == 0 {
        return arg("GLCM offset must be non-zero");
    }
    let (w, h) = (q.width() as isize, q.height() as isize);
    if dx.abs() >= w || dy.abs() >= h {
        return arg(format!(
            "offset ({dx}, {dy}) does not fit a {w}x{h} image"
        ));
    }
    let levels = q.levels();
    let mut counts = vec![0u64; levels * levels];
    let x_range = (0.max(-dx))..(w.min(w - dx));
    let y_range = (0.max(-dy))..(h.min(h - dy));
    for y in y_range {
        for x in x_range.clone() {
            let a = q.get(x as usize, y as usize);
            let b = q.get((x + dx) as usize, (y + dy) as usize);
            counts[a * levels + b] += 1;
            counts[b * levels + a] += 1;
        }
    }
    let total: u64 = counts.iter().sum();
    let entries = counts
        .into_iter()
        .map(|c| c as f64 / total as f64)
        .collect();
    Ok(Glcm { levels, entries })
}

/// The 13 Haralick statistics of one matrix, in [`HARALICK_NAMES`] order.
///
/// Gray-level indices are 0-based. Correlation of a matrix whose marginal
/// has zero variance is reported as 1, and IMC1 with zero marginal entropy
/// as 0.
pub fn haralick_from_glcm(g: &Glcm) -> [f64; 13] {
    let n = g.levels;
    let mut px = vec![0.0; n];
    let mut py = vec![0.0; n];
    let mut p_sum = vec![0.0; 2 * n - 1];
    let mut p_diff = vec![0.0; n];

    let mut asm = 0.0;
    let mut idm = 0.0;
    let mut entropy = 0.0;
    let mut ij_sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            let p = g.get(i, j);
            if p == 0.0 {
                continue;
            }
            px[i] += p;
            py[j] += p;
            p_sum[i + j] += p;
            p_diff[i.abs_diff(j)] += p;
            asm += p * p;
            let d = i as f64 - j as f64;
            idm += p / (1.0 + d * d);
            entropy += neg_xlnx(p);
            ij_sum += (i * j) as f64 * p;
        }
    }

    let mean_x: f64 = px.iter().enumerate().map(|(i, &p)| i as f64 * p).sum();
    let mean_y: f64 = py.iter().enumerate().map(|(j, &p)| j as f64 * p).sum();
    let var_x: f64 = px
        .iter()
        .enumerate()
        .map(|(i, &p)| (i as f64 - mean_x).powi(2) * p)
        .sum();
    let var_y: f64 = py
        .iter()
        .enumerate()
        .map(|(j, &p)| (j as f64 - mean_y).powi(2) * p)
        .sum();

    let contrast: f64 = p_diff
        .iter()
        .enumerate()
        .map(|(k, &p)| (k * k) as f64 * p)
        .sum();
    let sd = (var_x * var_y).sqrt();
    let correlation = if sd > 0.0 {
        (ij_sum - mean_x * mean_y) / sd
    } else {
        1.0
    };

    let sum_avg: f64 = p_sum.iter().enumerate().map(|(k, &p)| k as f64 * p).sum();
    let sum_var: f64 = p_sum
        .iter()
        .enumerate()
        .map(|(k, &p)| (k as f64 - sum_avg).powi(2) * p)
        .sum();
    let sum_entropy: f64 = p_sum.iter().map(|&p| neg_xlnx(p)).sum();

    let diff_mean: f64 = p_diff.iter().enumerate().map(|(k, &p)| k as f64 * p).sum();
    let diff_var: f64 = p_diff
        .iter()
        .enumerate()
        .map(|(k, &p)| (k as f64 - diff_mean).powi(2) * p)
        .sum();
    let diff_entropy: f64 = p_diff.iter().map(|&p| neg_xlnx(p)).sum();

    let hx: f64 = px.iter().map(|&p| neg_xlnx(p)).sum();
    let hy: f64 = py.iter().map(|&p| neg_xlnx(p)).sum();
    let mut hxy1 = 0.0;
    let mut hxy2 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let m = px[i] * py[j];
            if m > 0.0 {
                hxy1 -= g.get(i, j) * m.ln();
                hxy2 -= m * m.ln();
            }
        }
    }
    let hmax = hx.max(hy);
    let imc1 = if hmax > 0.0 {
        (entropy - hxy1) / hmax
    } else {
        0.0
    };
    let imc2 = (1.0 - (-2.0 * (hxy2 - entropy)).exp()).max(0.0).sqrt();

    [
        asm,
        contrast,
        correlation,
        var_x,
        idm,
        sum_avg,
        sum_var,
        sum_entropy,
        entropy,
        diff_var,
        diff_entropy,
        imc1,
        imc2,
    ]
}

/// Haralick features at 32 gray levels, averaged over the four distance-1
/// directions.
pub fn haralick_features(img: &GrayImage) -> Result<FeatureVector> {
    let q = quantize(img, HARALICK_LEVELS)?;
    let mut acc = [0.0; 13];
    for (dx, dy) in HARALICK_OFFSETS {
        let stats = haralick_from_glcm(&glcm(&q, dx, dy)?);
        for (a, s) in acc.iter_mut().zip(stats) {
            *a += s;
        }
    }
    let n = HARALICK_OFFSETS.len() as f64;
    FeatureVector::from_static(&HARALICK_NAMES, acc.iter().map(|a| a / n).collect())
}
