//! Texture features, moisture classifiers and adversarial domain adaptation
//! with an adjusted-mutual-information checkpoint callback.

pub mod adapt;
pub mod classifiers;
pub mod clustering;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod features;
pub mod image_io;
pub mod metrics;
pub mod nn;
pub mod synth;

pub use adapt::{train_adaptmoist, AdaptMoistModel, TrainConfig, TrainReport};
pub use dataset::{Dataset, MoistureClass, Sample, Standardizer};
pub use error::{Error, Result};
pub use features::{combined_features, FeatureVector, Family};
pub use image_io::{load_image, quantize, GrayImage, QuantizedImage};
