//! K-means (k-means++ seeding, Lloyd iterations) and adjusted mutual
//! information between two labelings.
//!
//! Logarithms are natural throughout. The expected mutual information uses
//! the hypergeometric permutation model evaluated in log-gamma space so that
//! it stays finite for a few hundred samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::error::{arg, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iter: 300,
            tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    /// Final inertia of every restart, in restart order.
    pub restart_inertias: Vec<f64>,
}

/// One Lloyd run from given centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct LloydRun {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    /// Inertia after each assignment step.
    pub trace: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid, lowest index on ties, and its squared distance.
fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, cent) in centroids.iter().enumerate() {
        let d = sq_dist(p, cent);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn kmeans_plus_plus(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = vec![points[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 && target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            // rounding can walk past the end onto a zero-weight point
            if d2[chosen] == 0.0 {
                chosen = d2.iter().rposition(|&d| d > 0.0).unwrap();
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = points[pick].clone();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Lloyd iterations until the largest centroid move is below `tol` or
/// `max_iter` is reached. A cluster that loses all its points is moved onto
/// the point farthest from its current centroid.
pub fn lloyd(points: &[Vec<f64>], init: Vec<Vec<f64>>, max_iter: usize, tol: f64) -> LloydRun {
    let k = init.len();
    let dim = points[0].len();
    let mut centroids = init;
    let mut assignments = vec![0; points.len()];
    let mut trace = Vec::new();

    let assign = |centroids: &[Vec<f64>], assignments: &mut [usize]| -> (f64, Vec<f64>) {
        let mut inertia = 0.0;
        let mut dists = Vec::with_capacity(points.len());
        for (a, p) in assignments.iter_mut().zip(points) {
            let (c, d) = nearest(p, centroids);
            *a = c;
            inertia += d;
            dists.push(d);
        }
        (inertia, dists)
    };

    for _ in 0..max_iter {
        let (inertia, mut dists) = assign(&centroids, &mut assignments);
        trace.push(inertia);

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            counts[a] += 1;
            sums[a].iter_mut().zip(p).for_each(|(s, v)| *s += v);
        }
        let mut shift: f64 = 0.0;
        for c in 0..k {
            let new = if counts[c] > 0 {
                sums[c].iter().map(|s| s / counts[c] as f64).collect()
            } else {
                let far = dists
                    .iter()
                    .enumerate()
                    .fold(0, |best, (i, &d)| if d > dists[best] { i } else { best });
                dists[far] = 0.0;
                points[far].clone()
            };
            shift = shift.max(sq_dist(&new, &centroids[c]).sqrt());
            centroids[c] = new;
        }
        if shift < tol {
            break;
        }
    }
    let (inertia, _) = assign(&centroids, &mut assignments);
    trace.push(inertia);
    LloydRun {
        assignments,
        centroids,
        inertia,
        trace,
    }
}

/// Best of `cfg.restarts` k-means++ / Lloyd runs by inertia (earliest restart
/// on ties). Restart `r` draws from stream `r` of a generator seeded with
/// `seed`, so the outcome does not depend on scheduling.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, cfg: KMeansConfig) -> Result<KMeansResult> {
    if k == 0 || k > points.len() {
        return arg(format!("k = {k} is invalid for {} points", points.len()));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim || p.iter().any(|v| !v.is_finite())) {
        return arg("points must be finite and share one dimension");
    }
    let runs: Vec<LloydRun> = (0..cfg.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let init = kmeans_plus_plus(points, k, &mut rng);
            lloyd(points, init, cfg.max_iter, cfg.tol)
        })
        .collect();
    let restart_inertias: Vec<f64> = runs.iter().map(|r| r.inertia).collect();
    let best = restart_inertias
        .iter()
        .enumerate()
        .fold(0, |b, (i, &v)| if v < restart_inertias[b] { i } else { b });
    let run = runs.into_iter().nth(best).unwrap();
    Ok(KMeansResult {
        assignments: run.assignments,
        centroids: run.centroids,
        inertia: run.inertia,
        restart_inertias,
    })
}

/// Joint counts of two labelings over dense label indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<Vec<u64>>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    total: u64,
}

impl ContingencyTable {
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let cols = counts.first().map_or(0, Vec::len);
        if counts.is_empty() || cols == 0 || counts.iter().any(|r| r.len() != cols) {
            return arg("contingency table must be a non-empty rectangle");
        }
        let row_sums: Vec<u64> = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums: Vec<u64> = (0..cols).map(|j| counts.iter().map(|r| r[j]).sum()).collect();
        let total = row_sums.iter().sum();
        if total == 0 {
            return arg("contingency table is empty");
        }
        Ok(Self {
            counts,
            row_sums,
            col_sums,
            total,
        })
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.col_sums
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

/// Relabels to `0..k` in order of first appearance.
fn canonical(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = std::collections::HashMap::new();
    let out = labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect();
    (out, map.len())
}

/// Contingency table of `u` (rows) against `v` (columns), indexed by the
/// label values themselves.
pub fn contingency(u: &[usize], v: &[usize]) -> Result<ContingencyTable> {
    if u.len() != v.len() {
        return arg(format!("label lengths differ: {} vs {}", u.len(), v.len()));
    }
    if u.is_empty() {
        return arg("labelings must be non-empty");
    }
    let rows = u.iter().max().unwrap() + 1;
    let cols = v.iter().max().unwrap() + 1;
    let mut counts = vec![vec![0u64; cols]; rows];
    for (&a, &b) in u.iter().zip(v) {
        counts[a][b] += 1;
    }
    ContingencyTable::from_counts(counts)
}

pub fn mutual_info(t: &ContingencyTable) -> f64 {
    let n = t.total as f64;
    let mut mi = 0.0;
    for (i, row) in t.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / n * (n * c / (t.row_sums[i] as f64 * t.col_sums[j] as f64)).ln();
            }
        }
    }
    mi.max(0.0)
}

fn entropy_of_counts(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

pub fn entropy(labels: &[usize]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let (c, k) = canonical(labels);
    let mut counts = vec![0u64; k];
    c.into_iter().for_each(|l| counts[l] += 1);
    entropy_of_counts(&counts)
}

/// Expected mutual information of two labelings with the given marginals
/// when one of them is randomly permuted.
pub fn expected_mi(t: &ContingencyTable) -> f64 {
    let n = t.total;
    let nf = n as f64;
    let lg = |x: u64| ln_gamma(x as f64 + 1.0);
    let lg_n = lg(n);
    let mut emi = 0.0;
    for &a in &t.row_sums {
        for &b in &t.col_sums {
            let lo = (a + b).saturating_sub(n).max(1);
            let hi = a.min(b);
            let fixed = lg(a) + lg(b) + lg(n - a) + lg(n - b) - lg_n;
            for m in lo..=hi {
                let mf = m as f64;
                let term = mf / nf * (nf * mf / (a as f64 * b as f64)).ln();
                let log_p = fixed - lg(m) - lg(a - m) - lg(b - m) - lg(n + m - a - b);
                emi += term * log_p.exp();
            }
        }
    }
    emi
}

/// Adjusted mutual information normalized by `max(H(U), H(V))`.
///
/// Identical partitions score exactly 1. When the denominator vanishes
/// (below 1e-12 in magnitude) the score is 1 for identical partitions and
/// 0 otherwise. The result is exactly symmetric and invariant under any
/// relabeling of either side.
pub fn ami(u: &[usize], v: &[usize]) -> Result<f64> {
    if u.len() != v.len() {
        return arg(format!("label lengths differ: {} vs {}", u.len(), v.len()));
    }
    if u.len() < 2 {
        return arg("AMI needs at least two samples");
    }
    let (cu, _) = canonical(u);
    let (cv, _) = canonical(v);
    if cu == cv {
        return Ok(1.0);
    }
    // fixed orientation so swapping the arguments is bit-identical
    let (a, b) = if cu <= cv { (cu, cv) } else { (cv, cu) };
    let t = contingency(&a, &b)?;
    let mi = mutual_info(&t);
    let emi = expected_mi(&t);
    let h = entropy_of_counts(&t.row_sums).max(entropy_of_counts(&t.col_sums));
    let denom = h - emi;
    if denom.abs() < 1e-12 {
        return Ok(0.0);
    }
    Ok((mi - emi) / denom)
}
