//! Fourier power spectrum and its radial/angular bin sums.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::FeatureVector;
use crate::error::Result;
use crate::image_io::GrayImage;

pub const RADIAL_BINS: usize = 9;
pub const ANGULAR_BINS: usize = 8;

pub const FPS_NAMES: [&str; 17] = [
    "FPS_RadialSum_1",
    "FPS_RadialSum_2",
    "FPS_RadialSum_3",
    "FPS_RadialSum_4",
    "FPS_RadialSum_5",
    "FPS_RadialSum_6",
    "FPS_RadialSum_7",
    "FPS_RadialSum_8",
    "FPS_RadialSum_9",
    "FPS_AngularSum_1",
    "FPS_AngularSum_2",
    "FPS_AngularSum_3",
    "FPS_AngularSum_4",
    "FPS_AngularSum_5",
    "FPS_AngularSum_6",
    "FPS_AngularSum_7",
    "FPS_AngularSum_8",
];

/// Unnormalized in-place 2-D DFT of a row-major grid (rows, then columns).
pub(crate) fn fft2d(width: usize, height: usize, data: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let mut plan = |n| {
        if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        }
    };
    let row_fft = plan(width);
    for row in data.chunks_exact_mut(width) {
        row_fft.process(row);
    }
    let col_fft = plan(height);
    let mut column = vec![Complex64::new(0.0, 0.0); height];
    for x in 0..width {
        for (y, c) in column.iter_mut().enumerate() {
            *c = data[y * width + x];
        }
        col_fft.process(&mut column);
        for (y, c) in column.iter().enumerate() {
            data[y * width + x] = *c;
        }
    }
}

/// `|F(u,v)|²` with the zero frequency moved to cell `(width/2, height/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    width: usize,
    height: usize,
    /// Row-major; row index is the vertical frequency.
    power: Vec<f64>,
}

impl PowerSpectrum {
    /// Spectrum of an arbitrary real grid (row-major, `width * height`
    /// samples). The DC cell is kept.
    pub fn from_samples(width: usize, height: usize, samples: &[f64]) -> Self {
        assert_eq!(samples.len(), width * height);
        let mut data: Vec<Complex64> = samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
        fft2d(width, height, &mut data, false);

        let mut power = vec![0.0; width * height];
        for v in 0..height {
            let sv = (v + height / 2) % height;
            for u in 0..width {
                let su = (u + width / 2) % width;
                power[sv * width + su] = data[v * width + u].norm_sqr();
            }
        }
        Self {
            width,
            height,
            power,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    /// Power at shifted cell `(col, row)`.
    #[inline]
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.power[row * self.width + col]
    }

    /// Signed frequency indices of shifted cell `(col, row)`.
    #[inline]
    pub fn frequency(&self, col: usize, row: usize) -> (isize, isize) {
        (
            col as isize - (self.width / 2) as isize,
            row as isize - (self.height / 2) as isize,
        )
    }

    pub fn dc(&self) -> f64 {
        self.get(self.width / 2, self.height / 2)
    }

    pub fn total(&self) -> f64 {
        self.power.iter().sum()
    }

    fn zero_dc(&mut self) {
        let i = (self.height / 2) * self.width + self.width / 2;
        self.power[i] = 0.0;
    }
}

/// Spectrum of `img` with the DC cell kept.
pub fn power_spectrum_with_dc(img: &GrayImage) -> PowerSpectrum {
    let samples: Vec<f64> = img.pixels().iter().map(|&p| f64::from(p)).collect();
    PowerSpectrum::from_samples(img.width(), img.height(), &samples)
}

/// Centered power spectrum with the DC cell set to zero.
///
/// The mean is removed before the transform, which only changes the DC
/// cell and keeps flat images exactly zero instead of carrying rounding
/// residue into the other cells.
pub fn power_spectrum(img: &GrayImage) -> PowerSpectrum {
    let n = img.pixels().len() as f64;
    let mean = img.pixels().iter().map(|&p| f64::from(p)).sum::<f64>() / n;
    let samples: Vec<f64> = img.pixels().iter().map(|&p| f64::from(p) - mean).collect();
    let mut ps = PowerSpectrum::from_samples(img.width(), img.height(), &samples);
    ps.zero_dc();
    ps
}

fn normalized(fu: isize, fv: isize, width: usize, height: usize) -> (f64, f64) {
    (fu as f64 / width as f64, fv as f64 / height as f64)
}

/// Ring index for a frequency, or `None` at DC. Radius is normalized so the
/// Nyquist corner `(1/2, 1/2)` sits at 1; rings split `(0, 1]` evenly.
pub fn radial_bin(fu: isize, fv: isize, width: usize, height: usize) -> Option<usize> {
    if fu == 0 && fv == 0 {
        return None;
    }
    let (a, b) = normalized(fu, fv, width, height);
    let r = (a * a + b * b).sqrt() / 0.5f64.sqrt();
    let bin = (r * RADIAL_BINS as f64).ceil() as usize;
    Some(bin.clamp(1, RADIAL_BINS) - 1)
}

/// Sector index in `[0, π)` (opposite directions fold together), or `None`
/// at DC.
pub fn angular_bin(fu: isize, fv: isize, width: usize, height: usize) -> Option<usize> {
    if fu == 0 && fv == 0 {
        return None;
    }
    let (a, b) = normalized(fu, fv, width, height);
    let mut theta = b.atan2(a);
    if theta < 0.0 {
        theta += PI;
    }
    if theta >= PI {
        theta -= PI;
    }
    let bin = (theta / (PI / ANGULAR_BINS as f64)).floor() as usize;
    Some(bin.min(ANGULAR_BINS - 1))
}

/// Radial and angular bin sums of a spectrum.
pub fn fps_from_spectrum(ps: &PowerSpectrum) -> Result<FeatureVector> {
    let mut radial = [0.0; RADIAL_BINS];
    let mut angular = [0.0; ANGULAR_BINS];
    for row in 0..ps.height {
        for col in 0..ps.width {
            let (fu, fv) = ps.frequency(col, row);
            let p = ps.get(col, row);
            if let Some(r) = radial_bin(fu, fv, ps.width, ps.height) {
                radial[r] += p;
            }
            if let Some(a) = angular_bin(fu, fv, ps.width, ps.height) {
                angular[a] += p;
            }
        }
    }
    FeatureVector::from_static(&FPS_NAMES, radial.iter().chain(&angular).copied().collect())
}

pub fn fps_features(img: &GrayImage) -> Result<FeatureVector> {
    fps_from_spectrum(&power_spectrum(img))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cosine(size: usize, freq: usize) -> Vec<f64> {
        (0..size * size)
            .map(|i| {
                let x = (i % size) as f64;
                100.0 * (2.0 * PI * freq as f64 * x / size as f64).cos()
            })
            .collect()
    }

    #[test]
    fn constant_image_has_no_power() {
        let img = GrayImage::constant(8, 6, 123).unwrap();
        assert!(power_spectrum(&img).power().iter().all(|&p| p == 0.0));
        assert!(fps_features(&img).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cosine_hits_two_cells() {
        let ps = PowerSpectrum::from_samples(16, 16, &cosine(16, 2));
        let peak = ps.get(8 + 2, 8);
        assert!((peak - ps.get(8 - 2, 8)).abs() <= 1e-9 * peak);
        // |F| = A * M * N / 2
        assert!((peak - (100.0 * 128.0f64).powi(2)).abs() <= 1e-9 * peak);
        let rest: f64 = ps.total() - 2.0 * peak;
        assert!(rest.abs() <= 1e-9 * peak);
    }

    #[test]
    fn cosine_fps_bins() {
        let mut ps = PowerSpectrum::from_samples(16, 16, &cosine(16, 2));
        ps.zero_dc();
        let f = fps_from_spectrum(&ps).unwrap();
        let v = f.values();
        let total = 2.0 * (100.0 * 128.0f64).powi(2);
        let rb = radial_bin(2, 0, 16, 16).unwrap();
        for (i, &x) in v[..RADIAL_BINS].iter().enumerate() {
            let want = if i == rb { total } else { 0.0 };
            assert!((x - want).abs() <= 1e-9 * total, "radial {i}: {x}");
        }
        for (i, &x) in v[RADIAL_BINS..].iter().enumerate() {
            let want = if i == 0 { total } else { 0.0 };
            assert!((x - want).abs() <= 1e-9 * total, "angular {i}: {x}");
        }
    }

    #[test]
    fn bin_edges() {
        assert_eq!(radial_bin(0, 0, 8, 8), None);
        assert_eq!(radial_bin(4, 4, 8, 8), Some(RADIAL_BINS - 1));
        assert_eq!(radial_bin(-4, -4, 8, 8), Some(RADIAL_BINS - 1));
        assert_eq!(radial_bin(1, 0, 64, 64), Some(0));
        assert_eq!(angular_bin(-3, 0, 8, 8), Some(0));
        assert_eq!(angular_bin(3, 0, 8, 8), Some(0));
        assert_eq!(angular_bin(0, 2, 8, 8), Some(4));
        assert_eq!(angular_bin(0, -2, 8, 8), Some(4));
        assert_eq!(angular_bin(-1, 1, 8, 8), Some(6));
    }

    #[test]
    fn spectrum_is_point_symmetric() {
        let samples: Vec<f64> = (0..64).map(|i| ((i * 37) % 11) as f64).collect();
        let ps = PowerSpectrum::from_samples(8, 8, &samples);
        // cells (c, r) and (8 - c, 8 - r) mirror, skipping the unpaired Nyquist row/col
        for r in 1..8 {
            for c in 1..8 {
                let a = ps.get(c, r);
                let b = ps.get(8 - c, 8 - r);
                assert!((a - b).abs() <= 1e-6 * a.max(b).max(1.0));
            }
        }
    }
}
