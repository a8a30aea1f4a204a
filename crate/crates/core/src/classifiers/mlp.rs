use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Classifier;
use crate::dataset::{Dataset, MoistureClass};
use crate::error::Result;
use crate::nn::{Activation, AdamConfig, AdamState, Gradients, LayerSpec, Network};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MlpConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden: 100,
            epochs: 200,
            batch_size: 32,
            adam: AdamConfig::default(),
        }
    }
}

/// One ReLU hidden layer followed by a softmax output.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpClassifier {
    pub net: Network,
}

impl MlpClassifier {
    pub fn fit(
        xs: &[Vec<f64>],
        ys: &[usize],
        classes: usize,
        cfg: &MlpConfig,
        seed: u64,
    ) -> Result<Self> {
        let dim = xs[0].len();
        let mut net = Network::init(
            &[
                LayerSpec::new(dim, cfg.hidden, Activation::Relu),
                LayerSpec::new(cfg.hidden, classes, Activation::Softmax),
            ],
            seed,
        )?;
        let mut adam = AdamState::new(&net, cfg.adam);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let mut order: Vec<usize> = (0..xs.len()).collect();
        let batch = cfg.batch_size.max(1);

        for _ in 0..cfg.epochs {
            order.shuffle(&mut rng);
            for chunk in order.chunks(batch) {
                let mut grads = Gradients::zeros_like(&net);
                for &i in chunk {
                    let acts = net.forward(&xs[i])?;
                    let mut delta = acts.last().unwrap().clone();
                    delta[ys[i]] -= 1.0;
                    let (g, _) = net.backward_from_preactivation(&acts, &delta)?;
                    grads.add_scaled(&g, 1.0 / chunk.len() as f64);
                }
                adam.step(&mut net, &grads)?;
            }
        }
        Ok(Self { net })
    }
}

impl Classifier for MlpClassifier {
    fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        self.net.predict(x).expect("input matches the trained dimension")
    }
}

pub fn fit_mlp_classifier(train: &Dataset, cfg: &MlpConfig, seed: u64) -> Result<MlpClassifier> {
    let ys = train.label_indices()?;
    let xs: Vec<Vec<f64>> = train.samples().iter().map(|s| s.features.clone()).collect();
    MlpClassifier::fit(&xs, &ys, MoistureClass::COUNT, cfg, seed)
}
