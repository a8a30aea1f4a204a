//! Gray-level run-length matrices and the 11 Galloway-style statistics.

use super::FeatureVector;
use crate::error::Result;
use crate::image_io::{quantize, GrayImage, QuantizedImage};

pub const GLRLM_LEVELS: usize = 32;

pub const GLRLM_NAMES: [&str; 11] = [
    "GLRLM_ShortRunEmphasis",
    "GLRLM_LongRunEmphasis",
    "GLRLM_GrayLevelNonUniformity",
    "GLRLM_RunLengthNonUniformity",
    "GLRLM_RunPercentage",
    "GLRLM_LowGrayLevelRunEmphasis",
    "GLRLM_HighGrayLevelRunEmphasis",
    "GLRLM_ShortRunLowGrayLevelEmphasis",
    "GLRLM_ShortRunHighGrayLevelEmphasis",
    "GLRLM_LongRunLowGrayLevelEmphasis",
    "GLRLM_LongRunHighGrayLevelEmphasis",
];

/// Scan direction, measured counter-clockwise from the +x axis with image
/// rows growing downward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Deg0,
    Deg45,
    Deg90,
    Deg135,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Deg0,
        Direction::Deg45,
        Direction::Deg90,
        Direction::Deg135,
    ];

    /// Pixel step `(dx, dy)` in image coordinates.
    pub fn step(self) -> (isize, isize) {
        match self {
            Direction::Deg0 => (1, 0),
            Direction::Deg45 => (1, -1),
            Direction::Deg90 => (0, 1),
            Direction::Deg135 => (-1, -1),
        }
    }
}

/// `counts[level][length - 1]` = number of maximal runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunLengthMatrix {
    levels: usize,
    max_run: usize,
    counts: Vec<u64>,
    total_runs: u64,
    total_pixels: u64,
}

impl RunLengthMatrix {
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn max_run(&self) -> usize {
        self.max_run
    }

    /// Runs of gray level `level` (0-based) with length `length` (1-based).
    pub fn count(&self, level: usize, length: usize) -> u64 {
        self.counts[level * self.max_run + length - 1]
    }

    pub fn total_runs(&self) -> u64 {
        self.total_runs
    }

    pub fn total_pixels(&self) -> u64 {
        self.total_pixels
    }

    /// `Σ length × count`; equals the pixel count for any single direction.
    pub fn covered_pixels(&self) -> u64 {
        (0..self.levels)
            .flat_map(|i| (1..=self.max_run).map(move |j| (i, j)))
            .map(|(i, j)| j as u64 * self.count(i, j))
            .sum()
    }
}

pub fn glrlm(q: &QuantizedImage, direction: Direction) -> RunLengthMatrix {
    let (w, h) = (q.width() as isize, q.height() as isize);
    let (dx, dy) = direction.step();
    let max_run = q.width().max(q.height());
    let levels = q.levels();
    let mut counts = vec![0u64; levels * max_run];
    let inside = |x: isize, y: isize| x >= 0 && y >= 0 && x < w && y < h;

    let mut total_runs = 0;
    for y in 0..h {
        for x in 0..w {
            let level = q.get(x as usize, y as usize);
            let (px, py) = (x - dx, y - dy);
            if inside(px, py) && q.get(px as usize, py as usize) == level {
                continue; // not the start of a run
            }
            let mut len = 1;
            let (mut cx, mut cy) = (x + dx, y + dy);
            while inside(cx, cy) && q.get(cx as usize, cy as usize) == level {
                len += 1;
                cx += dx;
                cy += dy;
            }
            counts[level * max_run + len - 1] += 1;
            total_runs += 1;
        }
    }
    RunLengthMatrix {
        levels,
        max_run,
        counts,
        total_runs,
        total_pixels: (w * h) as u64,
    }
}

/// The 11 statistics in [`GLRLM_NAMES`] order, normalized by the total run
/// count. Gray level `i` and run length `j` are 1-based in the weights.
pub fn glrlm_statistics(m: &RunLengthMatrix) -> [f64; 11] {
    let mut s = [0.0; 11];
    let mut per_length = vec![0.0; m.max_run];
    for level in 0..m.levels {
        let i2 = ((level + 1) * (level + 1)) as f64;
        let mut per_level = 0.0;
        for j in 1..=m.max_run {
            let p = m.count(level, j) as f64;
            if p == 0.0 {
                continue;
            }
            let j2 = (j * j) as f64;
            per_level += p;
            per_length[j - 1] += p;
            s[0] += p / j2;
            s[1] += p * j2;
            s[5] += p / i2;
            s[6] += p * i2;
            s[7] += p / (i2 * j2);
            s[8] += p * i2 / j2;
            s[9] += p * j2 / i2;
            s[10] += p * i2 * j2;
        }
        s[2] += per_level * per_level;
    }
    s[3] = per_length.iter().map(|p| p * p).sum();
    let runs = m.total_runs as f64;
    for (k, v) in s.iter_mut().enumerate() {
        if k != 4 {
            *v /= runs;
        }
    }
    s[4] = runs / m.total_pixels as f64;
    s
}

/// GLRLM statistics at 32 gray levels averaged over the four directions.
pub fn glrlm_features(img: &GrayImage) -> Result<FeatureVector> {
    let q = quantize(img, GLRLM_LEVELS)?;
    let mut acc = [0.0; 11];
    for d in Direction::ALL {
        for (a, v) in acc.iter_mut().zip(glrlm_statistics(&glrlm(&q, d))) {
            *a += v;
        }
    }
    FeatureVector::from_static(&GLRLM_NAMES, acc.iter().map(|a| a / 4.0).collect())
}
