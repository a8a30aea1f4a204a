//! First-order intensity statistics on raw 0–255 values.

use super::{neg_xlnx, FeatureVector};
use crate::error::Result;
use crate::image_io::GrayImage;

pub const FOS_NAMES: [&str; 16] = [
    "FOS_Mean",
    "FOS_Variance",
    "FOS_Median",
    "FOS_Mode",
    "FOS_Skewness",
    "FOS_Kurtosis",
    "FOS_Energy",
    "FOS_Entropy",
    "FOS_MinimalGrayLevel",
    "FOS_MaximalGrayLevel",
    "FOS_CoefficientOfVariation",
    "FOS_10Percentile",
    "FOS_25Percentile",
    "FOS_75Percentile",
    "FOS_90Percentile",
    "FOS_HistogramWidth",
];

/// Percentile of sorted data by linear interpolation between closest ranks
/// (rank `q/100 * (n-1)`).
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let rank = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Percentile read from a 256-bin histogram instead of a sorted copy.
fn hist_percentile(cumulative: &[usize; 256], n: usize, q: f64) -> f64 {
    let rank = q / 100.0 * (n - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    let at = |r: usize| cumulative.iter().position(|&c| c > r).unwrap() as f64;
    let (a, b) = (at(lo), at(hi));
    a + (b - a) * frac
}

pub fn fos_features(img: &GrayImage) -> Result<FeatureVector> {
    let px = img.pixels();
    let n = px.len();
    let nf = n as f64;

    let mut hist = [0usize; 256];
    for &v in px {
        hist[usize::from(v)] += 1;
    }
    let mut cumulative = [0usize; 256];
    let mut running = 0;
    for (c, h) in cumulative.iter_mut().zip(hist) {
        running += h;
        *c = running;
    }

    let mean = px.iter().map(|&v| f64::from(v)).sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4, mut energy) = (0.0, 0.0, 0.0, 0.0);
    for &v in px {
        let v = f64::from(v);
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
        energy += v * v;
    }
    let variance = m2 / nf;
    let sd = variance.sqrt();
    let (skewness, kurtosis) = if sd > 0.0 {
        (m3 / nf / sd.powi(3), m4 / nf / (variance * variance))
    } else {
        (0.0, 0.0)
    };

    let entropy: f64 = hist.iter().map(|&c| neg_xlnx(c as f64 / nf)).sum();
    // lowest intensity wins ties
    let mode = hist
        .iter()
        .enumerate()
        .fold((0usize, 0usize), |best, (v, &c)| if c > best.1 { (v, c) } else { best })
        .0 as f64;
    let min = hist.iter().position(|&c| c > 0).unwrap() as f64;
    let max = hist.iter().rposition(|&c| c > 0).unwrap() as f64;
    let cov = if mean != 0.0 { sd / mean } else { 0.0 };
    let p = |q| hist_percentile(&cumulative, n, q);

    FeatureVector::from_static(
        &FOS_NAMES,
        vec![
            mean,
            variance,
            p(50.0),
            mode,
            skewness,
            kurtosis,
            energy,
            entropy,
            min,
            max,
            cov,
            p(10.0),
            p(25.0),
            p(75.0),
            p(90.0),
            max - min,
        ],
    )
}
