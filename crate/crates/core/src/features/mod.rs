//! Texture feature families and their fixed-order combination.
//!
//! Every extractor is a pure function of the pixel grid. Feature names and
//! their order are fixed; the canonical list ships as `feature_manifest.json`
//! at the crate root and is reproduced by [`manifest_json`].

mod fos;
mod fps;
mod glcm;
mod glrlm;
mod lbp;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::image_io::GrayImage;

pub(crate) use fps::fft2d;
pub use fos::{fos_features, percentile, FOS_NAMES};
pub use fps::{
    angular_bin, fps_features, fps_from_spectrum, power_spectrum, power_spectrum_with_dc, radial_bin, PowerSpectrum,
    ANGULAR_BINS, FPS_NAMES, RADIAL_BINS,
};
pub use glcm::{glcm, haralick_from_glcm, haralick_features, Glcm, HARALICK_LEVELS, HARALICK_NAMES, HARALICK_OFFSETS};
pub use glrlm::{
    glrlm, glrlm_features, glrlm_statistics, Direction, RunLengthMatrix, GLRLM_LEVELS, GLRLM_NAMES,
};
pub use lbp::{
    histogram_energy, histogram_entropy, lbp_features, lbp_histogram, uniform_ri_bin, LbpHistogram,
    LBP_CONFIGS, LBP_NAMES,
};

/// `-x ln x` with the `0 ln 0 = 0` convention.
#[inline]
pub(crate) fn neg_xlnx(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.ln()
    } else {
        0.0
    }
}

/// Ordered, named, finite feature values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    names: Vec<String>,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(names: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if names.len() != values.len() {
            return arg(format!(
                "{} names for {} values",
                names.len(),
                values.len()
            ));
        }
        if let Some((n, v)) = names.iter().zip(&values).find(|(_, v)| !v.is_finite()) {
            return Err(Error::Numeric(format!("feature {n} is not finite ({v})")));
        }
        Ok(Self { names, values })
    }

    pub(crate) fn from_static(names: &[&str], values: Vec<f64>) -> Result<Self> {
        Self::new(names.iter().map(|s| s.to_string()).collect(), values)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Concatenates vectors in order.
    pub fn concat(parts: impl IntoIterator<Item = FeatureVector>) -> Self {
        let mut names = Vec::new();
        let mut values = Vec::new();
        for p in parts {
            names.extend(p.names);
            values.extend(p.values);
        }
        Self { names, values }
    }
}

/// A named feature family, or the concatenation of all five.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Haralick,
    Fos,
    Fps,
    Glrlm,
    Lbp,
    Combined,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Haralick,
        Family::Fos,
        Family::Fps,
        Family::Glrlm,
        Family::Lbp,
        Family::Combined,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Haralick => "haralick",
            Family::Fos => "fos",
            Family::Fps => "fps",
            Family::Glrlm => "glrlm",
            Family::Lbp => "lbp",
            Family::Combined => "combined",
        }
    }

    pub fn names(self) -> Vec<&'static str> {
        match self {
            Family::Haralick => HARALICK_NAMES.to_vec(),
            Family::Fos => FOS_NAMES.to_vec(),
            Family::Fps => FPS_NAMES.to_vec(),
            Family::Glrlm => GLRLM_NAMES.to_vec(),
            Family::Lbp => LBP_NAMES.to_vec(),
            Family::Combined => COMBINED_ORDER
                .iter()
                .flat_map(|f| f.names())
                .collect(),
        }
    }

    pub fn extract(self, img: &GrayImage) -> Result<FeatureVector> {
        match self {
            Family::Haralick => haralick_features(img),
            Family::Fos => fos_features(img),
            Family::Fps => fps_features(img),
            Family::Glrlm => glrlm_features(img),
            Family::Lbp => lbp_features(img),
            Family::Combined => combined_features(img),
        }
    }

    /// Identifies the family whose canonical name list equals `names`.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Option<Family> {
        Family::ALL.into_iter().find(|f| {
            let expected = f.names();
            expected.len() == names.len()
                && expected.iter().zip(names).all(|(a, b)| *a == b.as_ref())
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::Argument(format!("unknown feature family '{s}'")))
    }
}

const COMBINED_ORDER: [Family; 5] = [
    Family::Haralick,
    Family::Fos,
    Family::Fps,
    Family::Glrlm,
    Family::Lbp,
];

/// Haralick(13) ‖ FOS(16) ‖ FPS(17) ‖ GLRLM(11) ‖ LBP(6) = 63 values.
pub fn combined_features(img: &GrayImage) -> Result<FeatureVector> {
    let parts = COMBINED_ORDER
        .iter()
        .map(|f| f.extract(img))
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureVector::concat(parts))
}

/// The canonical feature-name manifest as pretty-printed JSON.
pub fn manifest_json() -> String {
    let mut map = serde_json::Map::new();
    for f in Family::ALL {
        map.insert(
            f.as_str().to_string(),
            serde_json::Value::from(f.names()),
        );
    }
    let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(map))
        .expect("manifest serializes");
    s.push('\n');
    s
}

/// The manifest file shipped with the crate.
pub const SHIPPED_MANIFEST: &str = include_str!("../../feature_manifest.json");
