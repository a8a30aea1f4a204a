//! Circular local binary patterns with the uniform rotation-invariant
//! mapping, plus histogram energy and entropy.

use std::f64::consts::PI;

use super::{neg_xlnx, FeatureVector};
use crate::error::{arg, Result};
use crate::image_io::GrayImage;

/// `(radius, points)` pairs used by [`lbp_features`].
pub const LBP_CONFIGS: [(f64, usize); 3] = [(1.0, 8), (2.0, 16), (3.0, 24)];

pub const LBP_NAMES: [&str; 6] = [
    "LBP_R_1_P_8_Energy",
    "LBP_R_1_P_8_Entropy",
    "LBP_R_2_P_16_Energy",
    "LBP_R_2_P_16_Entropy",
    "LBP_R_3_P_24_Energy",
    "LBP_R_3_P_24_Entropy",
];

/// Normalized histogram over `points + 2` uniform rotation-invariant codes.
#[derive(Debug, Clone, PartialEq)]
pub struct LbpHistogram {
    pub radius: f64,
    pub points: usize,
    pub bins: Vec<f64>,
}

/// Interpolated neighbors that equal the center in exact arithmetic can land
/// a few ulps below it; genuine differences are many orders larger.
const TIE_SLACK: f64 = 1e-9;

/// Maps a `points`-bit pattern to its bin: the popcount if the circular
/// pattern has at most two 0/1 transitions, `points + 1` otherwise.
pub fn uniform_ri_bin(bits: &[bool]) -> usize {
    let p = bits.len();
    let transitions = (0..p).filter(|&k| bits[k] != bits[(k + 1) % p]).count();
    if transitions <= 2 {
        bits.iter().filter(|&&b| b).count()
    } else {
        p + 1
    }
}

// cos/sin of multiples of π/2 come out as ±1e-16; snap those to integers so
// axis-aligned neighbors are read without interpolation.
fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < 1e-9 {
        r
    } else {
        v
    }
}

pub fn lbp_histogram(img: &GrayImage, radius: f64, points: usize) -> Result<LbpHistogram> {
    if radius.is_nan() || radius <= 0.0 || points == 0 {
        return arg(format!("invalid LBP parameters R={radius}, P={points}"));
    }
    let margin = radius.ceil() as usize;
    let (w, h) = (img.width(), img.height());
    if w <= 2 * margin || h <= 2 * margin {
        return arg(format!(
            "{w}x{h} image too small for LBP radius {radius}"
        ));
    }

    let offsets: Vec<(f64, f64)> = (0..points)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / points as f64;
            (snap(radius * a.cos()), snap(-radius * a.sin()))
        })
        .collect();

    let mut counts = vec![0u64; points + 2];
    let mut bits = vec![false; points];
    for y in margin..h - margin {
        for x in margin..w - margin {
            let center = i32::from(img.get(x, y));
            // Differences against the center are exact small integers, which
            // keeps the threshold invariant to a global intensity shift.
            let diff = |xx: usize, yy: usize| f64::from(i32::from(img.get(xx, yy)) - center);
            for (bit, &(ox, oy)) in bits.iter_mut().zip(&offsets) {
                let sx = x as f64 + ox;
                let sy = y as f64 + oy;
                let x0 = sx.floor();
                let y0 = sy.floor();
                let (fx, fy) = (sx - x0, sy - y0);
                let (x0, y0) = (x0 as usize, y0 as usize);
                let x1 = if fx > 0.0 { x0 + 1 } else { x0 };
                let y1 = if fy > 0.0 { y0 + 1 } else { y0 };
                let top = diff(x0, y0) + fx * (diff(x1, y0) - diff(x0, y0));
                let bottom = diff(x0, y1) + fx * (diff(x1, y1) - diff(x0, y1));
                let value = top + fy * (bottom - top);
                *bit = value >= -TIE_SLACK;
            }
            counts[uniform_ri_bin(&bits)] += 1;
        }
    }
    let total: u64 = counts.iter().sum();
    Ok(LbpHistogram {
        radius,
        points,
        bins: counts.iter().map(|&c| c as f64 / total as f64).collect(),
    })
}

pub fn histogram_energy(bins: &[f64]) -> f64 {
    bins.iter().map(|b| b * b).sum()
}

pub fn histogram_entropy(bins: &[f64]) -> f64 {
    bins.iter().map(|&b| neg_xlnx(b)).sum()
}

pub fn lbp_features(img: &GrayImage) -> Result<FeatureVector> {
    let mut values = Vec::with_capacity(6);
    for (r, p) in LBP_CONFIGS {
        let h = lbp_histogram(img, r, p)?;
        values.push(histogram_energy(&h.bins));
        values.push(histogram_entropy(&h.bins));
    }
    FeatureVector::from_static(&LBP_NAMES, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_is_all_ones() {
        let img = GrayImage::constant(9, 9, 200).unwrap();
        for (r, p) in LBP_CONFIGS {
            let h = lbp_histogram(&img, r, p).unwrap();
            assert_eq!(h.bins.len(), p + 2);
            for (i, &b) in h.bins.iter().enumerate() {
                assert_eq!(b, if i == p { 1.0 } else { 0.0 });
            }
        }
        let f = lbp_features(&img).unwrap();
        assert_eq!(f.values(), &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn uniform_histogram_formulas() {
        let b = vec![0.1; 10];
        assert!((histogram_energy(&b) - 0.1).abs() < 1e-15);
        assert!((histogram_entropy(&b) - 10f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn mapping() {
        let p = |s: &str| s.chars().map(|c| c == '1').collect::<Vec<_>>();
        assert_eq!(uniform_ri_bin(&p("00000000")), 0);
        assert_eq!(uniform_ri_bin(&p("11111111")), 8);
        assert_eq!(uniform_ri_bin(&p("00111000")), 3);
        assert_eq!(uniform_ri_bin(&p("10000001")), 2);
        assert_eq!(uniform_ri_bin(&p("10100000")), 9);
    }

    #[test]
    fn too_small() {
        let img = GrayImage::constant(6, 6, 0).unwrap();
        assert!(lbp_histogram(&img, 3.0, 24).is_err());
        assert!(lbp_histogram(&img, 2.0, 16).is_ok());
        assert!(lbp_histogram(&img, 0.0, 8).is_err());
        assert!(lbp_features(&img).is_err());
    }

    #[test]
    fn single_bright_center() {
        // center darker than all neighbors -> all ones; brighter -> all zeros
        let dark = GrayImage::from_fn(3, 3, |x, y| if (x, y) == (1, 1) { 0 } else { 9 }).unwrap();
        assert_eq!(lbp_histogram(&dark, 1.0, 8).unwrap().bins[8], 1.0);
        let bright = GrayImage::from_fn(3, 3, |x, y| if (x, y) == (1, 1) { 9 } else { 0 }).unwrap();
        assert_eq!(lbp_histogram(&bright, 1.0, 8).unwrap().bins[0], 1.0);
    }
}
