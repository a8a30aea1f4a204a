//! Texture descriptors by enumeration. Images are `(width, height, pixels)`
//! with row-major pixels; `x` is the column and `y` the row.

use std::f64::consts::PI;

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.ln()
    } else {
        0.0
    }
}

pub fn quantize(pixels: &[u8], levels: usize) -> Vec<usize> {
    pixels.iter().map(|&v| v as usize * levels / 256).collect()
}

/// Symmetric normalized co-occurrence matrix, built by checking every
/// ordered pair of pixel positions for the requested displacement.
pub fn glcm(w: usize, h: usize, q: &[usize], levels: usize, dx: i64, dy: i64) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; levels]; levels];
    let mut pairs = 0.0;
    for p in 0..w * h {
        for r in 0..w * h {
            let (px, py) = ((p % w) as i64, (p / w) as i64);
            let (rx, ry) = ((r % w) as i64, (r / w) as i64);
            if rx - px == dx && ry - py == dy {
                m[q[p]][q[r]] += 1.0;
                m[q[r]][q[p]] += 1.0;
                pairs += 2.0;
            }
        }
    }
    for row in &mut m {
        for v in row.iter_mut() {
            *v /= pairs;
        }
    }
    m
}

/// The 13 Haralick statistics of one matrix, 0-based gray-level indices.
pub fn haralick_stats(p: &[Vec<f64>]) -> Vec<f64> {
    let n = p.len();
    let idx = |i: usize| i as f64;
    let px: Vec<f64> = (0..n).map(|i| (0..n).map(|j| p[i][j]).sum()).collect();
    let py: Vec<f64> = (0..n).map(|j| (0..n).map(|i| p[i][j]).sum()).collect();
    let mx: f64 = (0..n).map(|i| idx(i) * px[i]).sum();
    let my: f64 = (0..n).map(|j| idx(j) * py[j]).sum();
    let sx = (0..n).map(|i| (idx(i) - mx).powi(2) * px[i]).sum::<f64>().sqrt();
    let sy = (0..n).map(|j| (idx(j) - my).powi(2) * py[j]).sum::<f64>().sqrt();

    let mut sum_dist = vec![0.0; 2 * n - 1];
    let mut diff_dist = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            sum_dist[i + j] += p[i][j];
            diff_dist[i.abs_diff(j)] += p[i][j];
        }
    }
    let all = || (0..n).flat_map(move |i| (0..n).map(move |j| (i, j)));

    let asm: f64 = all().map(|(i, j)| p[i][j] * p[i][j]).sum();
    let contrast: f64 = all().map(|(i, j)| (idx(i) - idx(j)).powi(2) * p[i][j]).sum();
    let correlation = if sx * sy > 0.0 {
        all().map(|(i, j)| (idx(i) - mx) * (idx(j) - my) * p[i][j]).sum::<f64>() / (sx * sy)
    } else {
        1.0
    };
    let ssv: f64 = all().map(|(i, j)| (idx(i) - mx).powi(2) * p[i][j]).sum();
    let idm: f64 = all().map(|(i, j)| p[i][j] / (1.0 + (idx(i) - idx(j)).powi(2))).sum();
    let sum_avg: f64 = sum_dist.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    let sum_var: f64 = sum_dist.iter().enumerate().map(|(k, v)| (k as f64 - sum_avg).powi(2) * v).sum();
    let sum_ent: f64 = -sum_dist.iter().map(|&v| plogp(v)).sum::<f64>();
    let ent: f64 = -all().map(|(i, j)| plogp(p[i][j])).sum::<f64>();
    let diff_avg: f64 = diff_dist.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    let diff_var: f64 = diff_dist.iter().enumerate().map(|(k, v)| (k as f64 - diff_avg).powi(2) * v).sum();
    let diff_ent: f64 = -diff_dist.iter().map(|&v| plogp(v)).sum::<f64>();

    let hx: f64 = -px.iter().map(|&v| plogp(v)).sum::<f64>();
    let hy: f64 = -py.iter().map(|&v| plogp(v)).sum::<f64>();
    let mut hxy1 = 0.0;
    let mut hxy2 = 0.0;
    for (i, j) in all() {
        let m = px[i] * py[j];
        if m > 0.0 {
            hxy1 -= p[i][j] * m.ln();
            hxy2 -= m * m.ln();
        }
    }
    let imc1 = if hx.max(hy) > 0.0 { (ent - hxy1) / hx.max(hy) } else { 0.0 };
    let imc2 = (1.0 - (-2.0 * (hxy2 - ent)).exp()).max(0.0).sqrt();
    vec![
        asm, contrast, correlation, ssv, idm, sum_avg, sum_var, sum_ent, ent, diff_var, diff_ent, imc1, imc2,
    ]
}

/// Direction-averaged Haralick statistics at 32 gray levels.
pub fn haralick(w: usize, h: usize, pixels: &[u8]) -> Vec<f64> {
    let q = quantize(pixels, 32);
    let mut mean = vec![0.0; 13];
    for (dx, dy) in [(1, 0), (1, 1), (0, 1), (-1, 1)] {
        for (m, s) in mean.iter_mut().zip(haralick_stats(&glcm(w, h, &q, 32, dx, dy))) {
            *m += s / 4.0;
        }
    }
    mean
}

fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q / 100.0 * (sorted.len() as f64 - 1.0);
    let below = pos.floor();
    let lo = sorted[below as usize];
    let hi = sorted[(below as usize + 1).min(sorted.len() - 1)];
    lo + (pos - below) * (hi - lo)
}

/// First-order statistics from the sorted pixel list.
pub fn fos(pixels: &[u8]) -> Vec<f64> {
    let mut v: Vec<f64> = pixels.iter().map(|&p| p as f64).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    let (skew, kurt) = if sd > 0.0 {
        (
            v.iter().map(|x| ((x - mean) / sd).powi(3)).sum::<f64>() / n,
            v.iter().map(|x| ((x - mean) / sd).powi(4)).sum::<f64>() / n,
        )
    } else {
        (0.0, 0.0)
    };
    let mut mode = v[0];
    let mut mode_count = 0;
    let mut entropy = 0.0;
    for level in 0..=255 {
        let c = v.iter().filter(|&&x| x == level as f64).count();
        if c > mode_count {
            mode = level as f64;
            mode_count = c;
        }
        entropy -= plogp(c as f64 / n);
    }
    let energy: f64 = v.iter().map(|x| x * x).sum();
    let (min, max) = (v[0], v[v.len() - 1]);
    let cov = if mean == 0.0 { 0.0 } else { sd / mean };
    vec![
        mean,
        var,
        percentile_sorted(&v, 50.0),
        mode,
        skew,
        kurt,
        energy,
        entropy,
        min,
        max,
        cov,
        percentile_sorted(&v, 10.0),
        percentile_sorted(&v, 25.0),
        percentile_sorted(&v, 75.0),
        percentile_sorted(&v, 90.0),
        max - min,
    ]
}

/// `|F(u,v)|²` of the direct double-sum DFT, stored with frequency
/// `(u, v)` (signed) at column `u + w/2`, row `v + h/2`.
pub fn dft_power(w: usize, h: usize, samples: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    for row in 0..h {
        for col in 0..w {
            let u = col as f64 - (w / 2) as f64;
            let v = row as f64 - (h / 2) as f64;
            let (mut re, mut im) = (0.0, 0.0);
            for y in 0..h {
                for x in 0..w {
                    let phase = -2.0 * PI * (u * x as f64 / w as f64 + v * y as f64 / h as f64);
                    re += samples[y * w + x] * phase.cos();
                    im += samples[y * w + x] * phase.sin();
                }
            }
            out[row * w + col] = re * re + im * im;
        }
    }
    out
}

/// Radial ring index in 0..9 of a non-DC frequency: rings split the
/// normalized radius (0, 1] evenly, radius 1 being the Nyquist corner.
pub fn ring(fu: f64, fv: f64, w: usize, h: usize) -> usize {
    let r = ((fu / w as f64).powi(2) + (fv / h as f64).powi(2)).sqrt() / 0.5f64.sqrt();
    (0..9).find(|&k| r <= (k + 1) as f64 / 9.0).unwrap_or(8)
}

/// Angular sector index in 0..8 of a non-DC frequency over [0, π).
pub fn sector(fu: f64, fv: f64, w: usize, h: usize) -> usize {
    let mut t = (fv / h as f64).atan2(fu / w as f64);
    if t < 0.0 {
        t += PI;
    }
    if t >= PI {
        t -= PI;
    }
    (0..8).rev().find(|&k| t >= k as f64 * PI / 8.0).unwrap()
}

/// Ring and sector sums of a centered spectrum, skipping the DC cell.
pub fn fps_bins(w: usize, h: usize, power: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; 17];
    for row in 0..h {
        for col in 0..w {
            let fu = col as f64 - (w / 2) as f64;
            let fv = row as f64 - (h / 2) as f64;
            if fu == 0.0 && fv == 0.0 {
                continue;
            }
            out[ring(fu, fv, w, h)] += power[row * w + col];
            out[9 + sector(fu, fv, w, h)] += power[row * w + col];
        }
    }
    out
}

pub fn fps(w: usize, h: usize, pixels: &[u8]) -> Vec<f64> {
    let samples: Vec<f64> = pixels.iter().map(|&p| p as f64).collect();
    let mut power = dft_power(w, h, &samples);
    power[(h / 2) * w + w / 2] = 0.0;
    fps_bins(w, h, &power)
}

/// Maximal runs along `(dx, dy)`: `runs[level][length - 1]`.
pub fn run_lengths(w: usize, h: usize, q: &[usize], levels: usize, dx: i64, dy: i64) -> Vec<Vec<usize>> {
    let max_run = w.max(h);
    let mut runs = vec![vec![0; max_run]; levels];
    let at = |x: i64, y: i64| -> Option<usize> {
        (x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h).then(|| q[y as usize * w + x as usize])
    };
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let level = at(x, y).unwrap();
            if at(x - dx, y - dy) == Some(level) {
                continue;
            }
            let mut len = 1;
            while at(x + len as i64 * dx, y + len as i64 * dy) == Some(level) {
                len += 1;
            }
            runs[level][len - 1] += 1;
        }
    }
    runs
}

/// The 11 run-length statistics with 1-based level `i` and length `j`,
/// normalized by the number of runs.
pub fn glrlm_stats(runs: &[Vec<usize>], pixel_count: usize) -> Vec<f64> {
    let r: f64 = runs.iter().flatten().sum::<usize>() as f64;
    let cells = || {
        runs.iter().enumerate().flat_map(|(l, row)| {
            row.iter()
                .enumerate()
                .map(move |(k, &c)| ((l + 1) as f64, (k + 1) as f64, c as f64))
        })
    };
    let weighted = |f: &dyn Fn(f64, f64) -> f64| cells().map(|(i, j, p)| p * f(i, j)).sum::<f64>() / r;
    let gln = runs.iter().map(|row| (row.iter().sum::<usize>() as f64).powi(2)).sum::<f64>() / r;
    let max_run = runs[0].len();
    let rln = (0..max_run)
        .map(|k| (runs.iter().map(|row| row[k]).sum::<usize>() as f64).powi(2))
        .sum::<f64>()
        / r;
    vec![
        weighted(&|_, j| 1.0 / (j * j)),
        weighted(&|_, j| j * j),
        gln,
        rln,
        r / pixel_count as f64,
        weighted(&|i, _| 1.0 / (i * i)),
        weighted(&|i, _| i * i),
        weighted(&|i, j| 1.0 / (i * i * j * j)),
        weighted(&|i, j| i * i / (j * j)),
        weighted(&|i, j| j * j / (i * i)),
        weighted(&|i, j| i * i * j * j),
    ]
}

pub fn glrlm(w: usize, h: usize, pixels: &[u8]) -> Vec<f64> {
    let q = quantize(pixels, 32);
    let mut mean = vec![0.0; 11];
    for (dx, dy) in [(1, 0), (1, -1), (0, 1), (-1, -1)] {
        let stats = glrlm_stats(&run_lengths(w, h, &q, 32, dx, dy), w * h);
        for (m, s) in mean.iter_mut().zip(stats) {
            *m += s / 4.0;
        }
    }
    mean
}

/// Uniform rotation-invariant LBP histogram with bilinear sampling.
/// Neighbors at `(x + R cos a, y - R sin a)`; ties with the center count as
/// "greater or equal" up to a 1e-9 slack for interpolation rounding.
pub fn lbp_histogram(w: usize, h: usize, pixels: &[u8], radius: f64, points: usize) -> Vec<f64> {
    let img = |x: usize, y: usize| pixels[y * w + x] as f64;
    let clean = |v: f64| if (v - v.round()).abs() < 1e-9 { v.round() } else { v };
    let margin = radius.ceil() as usize;
    let mut counts = vec![0usize; points + 2];
    for y in margin..h - margin {
        for x in margin..w - margin {
            let c = img(x, y);
            let bits: Vec<bool> = (0..points)
                .map(|k| {
                    let a = 2.0 * PI * k as f64 / points as f64;
                    let sx = x as f64 + clean(radius * a.cos());
                    let sy = y as f64 + clean(-radius * a.sin());
                    let (x0, y0) = (sx.floor() as usize, sy.floor() as usize);
                    let (fx, fy) = (sx - x0 as f64, sy - y0 as f64);
                    let x1 = (x0 + 1).min(w - 1);
                    let y1 = (y0 + 1).min(h - 1);
                    let v = (1.0 - fx) * (1.0 - fy) * img(x0, y0)
                        + fx * (1.0 - fy) * img(x1, y0)
                        + (1.0 - fx) * fy * img(x0, y1)
                        + fx * fy * img(x1, y1);
                    v >= c - 1e-9
                })
                .collect();
            let changes = (0..points).filter(|&k| bits[k] != bits[(k + 1) % points]).count();
            let ones = bits.iter().filter(|&&b| b).count();
            counts[if changes <= 2 { ones } else { points + 1 }] += 1;
        }
    }
    let total: usize = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// Energy and entropy for (1,8), (2,16), (3,24).
pub fn lbp(w: usize, h: usize, pixels: &[u8]) -> Vec<f64> {
    let mut out = Vec::new();
    for (r, p) in [(1.0, 8), (2.0, 16), (3.0, 24)] {
        let hist = lbp_histogram(w, h, pixels, r, p);
        out.push(hist.iter().map(|v| v * v).sum());
        out.push(-hist.iter().map(|&v| plogp(v)).sum::<f64>());
    }
    out
}
