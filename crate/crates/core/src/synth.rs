//! Seeded synthetic textures with controllable photometric domain shift.
//!
//! A class is a band-pass Gaussian random field around a dominant spatial
//! frequency, with broadband roughness mixed in. A domain is a photometric
//! transform applied afterwards (gamma, contrast, brightness, blur, noise),
//! so the class balance stays fixed while the pixel distribution moves.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dataset::MoistureClass;
use crate::error::{arg, Error, Result};
use crate::features::fft2d;
use crate::image_io::GrayImage;

pub const DEFAULT_IMAGE_SIZE: usize = 64;
pub const MIN_IMAGE_SIZE: usize = 32;
pub const MIN_PER_CLASS: usize = 10;

/// Mean intensity and spread of the undistorted texture, on a 0..1 scale.
const BASE_LEVEL: f64 = 0.5;
const BASE_SPREAD: f64 = 0.16;
/// Per-image nuisance variation: log-sd of the frequency and spread, sd of
/// the mean level.
const FREQ_JITTER: f64 = 0.08;
const SPREAD_JITTER: f64 = 0.2;
const LEVEL_JITTER: f64 = 0.04;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DomainSpec {
    pub name: String,
    pub brightness_offset: i32,
    pub contrast_gain: f64,
    pub gamma: f64,
    pub blur_radius: f64,
    pub noise_sigma: f64,
}

impl DomainSpec {
    pub fn identity(name: &str) -> Self {
        Self {
            name: name.to_string(),
            brightness_offset: 0,
            contrast_gain: 1.0,
            gamma: 1.0,
            blur_radius: 0.0,
            noise_sigma: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.contrast_gain) || !positive(self.gamma) {
            return arg(format!("domain '{}': contrast gain and gamma must be > 0", self.name));
        }
        if !(self.blur_radius >= 0.0 && self.noise_sigma >= 0.0) {
            return arg(format!("domain '{}': blur and noise must be >= 0", self.name));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassSpec {
    pub class: MoistureClass,
    /// Cycles per image.
    pub dominant_frequency: f64,
    /// Weight of the broadband component relative to the band-pass field.
    pub roughness: f64,
}

/// Dry chips are coarse and smooth, wet chips fine-grained and rough.
pub fn default_classes() -> [ClassSpec; 3] {
    [
        ClassSpec { class: MoistureClass::Dry, dominant_frequency: 5.5, roughness: 0.3 },
        ClassSpec { class: MoistureClass::Medium, dominant_frequency: 7.5, roughness: 0.4 },
        ClassSpec { class: MoistureClass::Wet, dominant_frequency: 10.0, roughness: 0.5 },
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shift {
    None,
    Mild,
    Strong,
}

impl Shift {
    pub const ALL: [Shift; 3] = [Shift::None, Shift::Mild, Shift::Strong];

    pub fn as_str(self) -> &'static str {
        match self {
            Shift::None => "none",
            Shift::Mild => "mild",
            Shift::Strong => "strong",
        }
    }

    /// Photometric regime of the target domain; the source is always the
    /// identity domain.
    pub fn target_domain(self) -> DomainSpec {
        match self {
            Shift::None => DomainSpec::identity("target"),
            Shift::Mild => DomainSpec {
                brightness_offset: 12,
                contrast_gain: 0.9,
                ..DomainSpec::identity("target")
            },
            Shift::Strong => DomainSpec {
                name: "target".into(),
                brightness_offset: -20,
                contrast_gain: 1.3,
                gamma: 1.6,
                blur_radius: 1.0,
                noise_sigma: 6.0,
            },
        }
    }
}

impl fmt::Display for Shift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Shift {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Argument(format!("unknown shift '{s}' (expected none, mild or strong)")))
    }
}

/// splitmix64 finalizer, used to derive independent per-image seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn image_seed(scenario_seed: u64, domain: u64, class: MoistureClass, index: usize) -> u64 {
    mix(mix(mix(scenario_seed ^ domain.wrapping_mul(0x100_0000_01b3)) ^ class.index() as u64) ^ index as u64)
}

fn normal_field(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

fn standardize(v: &mut [f64]) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    let sd = if sd > 0.0 { sd } else { 1.0 };
    v.iter_mut().for_each(|x| *x = (*x - mean) / sd);
}

/// Gaussian ring filter around `freq` cycles/image applied to white noise.
fn band_pass(noise: &[f64], size: usize, freq: f64) -> Vec<f64> {
    let mut data: Vec<Complex64> = noise.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft2d(size, size, &mut data, false);
    let width = 0.25 * freq + 1.0;
    let signed = |i: usize| if i <= size / 2 { i as f64 } else { i as f64 - size as f64 };
    for v in 0..size {
        for u in 0..size {
            let r = signed(u).hypot(signed(v));
            data[v * size + u] *= (-(r - freq).powi(2) / (2.0 * width * width)).exp();
        }
    }
    fft2d(size, size, &mut data, true);
    data.iter().map(|c| c.re).collect()
}

/// Separable Gaussian blur with mirrored borders.
fn gaussian_blur(v: &[f64], size: usize, sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return v.to_vec();
    }
    let half = (3.0 * sigma).ceil() as isize;
    let kernel: Vec<f64> = (-half..=half).map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let norm: f64 = kernel.iter().sum();
    let reflect = |i: isize| -> usize {
        let n = size as isize;
        let mut i = i;
        while i < 0 || i >= n {
            i = if i < 0 { -i - 1 } else { 2 * n - i - 1 };
        }
        i as usize
    };
    let pass = |src: &[f64], horizontal: bool| -> Vec<f64> {
        let mut out = vec![0.0; src.len()];
        for y in 0..size {
            for x in 0..size {
                let mut acc = 0.0;
                for (k, w) in kernel.iter().enumerate() {
                    let d = k as isize - half;
                    let (sx, sy) = if horizontal {
                        (reflect(x as isize + d), y)
                    } else {
                        (x, reflect(y as isize + d))
                    };
                    acc += w * src[sy * size + sx];
                }
                out[y * size + x] = acc / norm;
            }
        }
        out
    };
    pass(&pass(v, true), false)
}

pub fn generate_image(domain: &DomainSpec, class: &ClassSpec, size: usize, seed: u64) -> Result<GrayImage> {
    if size < MIN_IMAGE_SIZE {
        return arg(format!("image size must be at least {MIN_IMAGE_SIZE}, got {size}"));
    }
    domain.validate()?;
    let n = size * size;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = normal_field(&mut rng, 3);
    let freq = class.dominant_frequency * (FREQ_JITTER * jitter[0]).exp();
    let spread = BASE_SPREAD * (SPREAD_JITTER * jitter[1]).exp();
    let level = BASE_LEVEL + LEVEL_JITTER * jitter[2];

    let mut texture = band_pass(&normal_field(&mut rng, n), size, freq);
    standardize(&mut texture);
    let rough = normal_field(&mut rng, n);
    texture.iter_mut().zip(&rough).for_each(|(t, r)| *t += class.roughness * r);
    standardize(&mut texture);

    let shaped: Vec<f64> = texture
        .iter()
        .map(|t| {
            let v = (level + spread * t).clamp(0.0, 1.0).powf(domain.gamma);
            255.0 * (0.5 + domain.contrast_gain * (v - 0.5)) + f64::from(domain.brightness_offset)
        })
        .collect();
    let blurred = gaussian_blur(&shaped, size, domain.blur_radius);
    let noise = normal_field(&mut rng, n);
    let pixels = blurred
        .iter()
        .zip(&noise)
        .map(|(v, z)| (v + domain.noise_sigma * z).round().clamp(0.0, 255.0) as u8)
        .collect();
    GrayImage::new(size, size, pixels)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticImage {
    /// File stem, e.g. `img_dry_007`.
    pub id: String,
    pub domain: String,
    pub class: MoistureClass,
    pub image: GrayImage,
}

/// `per_class` images of every class under one domain, in class-major order.
pub fn generate_domain(
    domain: &DomainSpec,
    classes: &[ClassSpec],
    per_class: usize,
    size: usize,
    seed: u64,
    domain_stream: u64,
) -> Result<Vec<SyntheticImage>> {
    let width = per_class.saturating_sub(1).to_string().len().max(3);
    let jobs: Vec<(ClassSpec, usize)> = classes
        .iter()
        .flat_map(|c| (0..per_class).map(move |i| (*c, i)))
        .collect();
    jobs.par_iter()
        .map(|(c, i)| {
            let image = generate_image(domain, c, size, image_seed(seed, domain_stream, c.class, *i))?;
            Ok(SyntheticImage {
                id: format!("img_{}_{:0width$}", c.class.as_str().to_lowercase(), i),
                domain: domain.name.clone(),
                class: c.class,
                image,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub shift: Shift,
    pub source: Vec<SyntheticImage>,
    pub target: Vec<SyntheticImage>,
}

/// In-memory scenario: identity-domain source, shifted target.
pub fn build_scenario(shift: Shift, per_class: usize, seed: u64) -> Result<Scenario> {
    if per_class < MIN_PER_CLASS {
        return arg(format!("need at least {MIN_PER_CLASS} images per class, got {per_class}"));
    }
    let classes = default_classes();
    Ok(Scenario {
        shift,
        source: generate_domain(&DomainSpec::identity("source"), &classes, per_class, DEFAULT_IMAGE_SIZE, seed, 0)?,
        target: generate_domain(&shift.target_domain(), &classes, per_class, DEFAULT_IMAGE_SIZE, seed, 1)?,
    })
}

/// Writes `out_dir/{source,target}/img_<class>_<index>.png` and a
/// `labels.csv` (`id,domain,label`) in each domain directory.
pub fn generate_scenario(shift: Shift, per_class: usize, seed: u64, out_dir: &Path) -> Result<Scenario> {
    let scenario = build_scenario(shift, per_class, seed)?;
    for images in [&scenario.source, &scenario.target] {
        let dir = out_dir.join(&images[0].domain);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let mut labels = String::from("id,domain,label\n");
        for img in images {
            img.image.save_png(&dir.join(format!("{}.png", img.id)))?;
            labels.push_str(&format!("{},{},{}\n", img.id, img.domain, img.class));
        }
        let path = dir.join("labels.csv");
        fs::File::create(&path)
            .and_then(|mut f| f.write_all(labels.as_bytes()))
            .map_err(|e| Error::io(&path, e))?;
    }
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_sized() {
        let c = default_classes()[1];
        let d = DomainSpec::identity("s");
        let a = generate_image(&d, &c, 32, 5).unwrap();
        assert_eq!(a, generate_image(&d, &c, 32, 5).unwrap());
        assert_ne!(a, generate_image(&d, &c, 32, 6).unwrap());
        assert_eq!(a.width(), 32);
        assert!(generate_image(&d, &c, 31, 5).is_err());
    }

    #[test]
    fn shifted_domain_changes_pixels() {
        let c = default_classes()[0];
        for shift in [Shift::Mild, Shift::Strong] {
            let a = generate_image(&DomainSpec::identity("s"), &c, 32, 9).unwrap();
            let b = generate_image(&shift.target_domain(), &c, 32, 9).unwrap();
            assert_ne!(a, b);
        }
    }

    #[test]
    fn invalid_domain() {
        let d = DomainSpec { gamma: 0.0, ..DomainSpec::identity("x") };
        assert!(generate_image(&d, &default_classes()[0], 32, 1).is_err());
        let d = DomainSpec { contrast_gain: -1.0, ..DomainSpec::identity("x") };
        assert!(d.validate().is_err());
    }

    #[test]
    fn blur_preserves_constants_and_mean() {
        let v = vec![3.0; 36 * 36];
        assert!(gaussian_blur(&v, 36, 1.5).iter().all(|x| (x - 3.0).abs() < 1e-12));
    }

    #[test]
    fn shift_parsing() {
        assert_eq!("Strong".parse::<Shift>().unwrap(), Shift::Strong);
        assert!("huge".parse::<Shift>().is_err());
    }

    #[test]
    fn scenario_layout() {
        let dir = tempfile::tempdir().unwrap();
        let s = generate_scenario(Shift::Strong, 10, 3, dir.path()).unwrap();
        assert_eq!(s.source.len() + s.target.len(), 60);
        for domain in ["source", "target"] {
            let labels = fs::read_to_string(dir.path().join(domain).join("labels.csv")).unwrap();
            let lines: Vec<&str> = labels.lines().collect();
            assert_eq!(lines[0], "id,domain,label");
            assert_eq!(lines.len(), 31);
            assert!(dir.path().join(domain).join("img_wet_009.png").exists());
        }
        assert!(build_scenario(Shift::None, 9, 1).is_err());
    }
}
