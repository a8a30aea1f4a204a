//! Adversarial domain adaptation of texture-feature classifiers.
//!
//! Three networks share one standardized input space:
//!
//! * `F` maps features to a 32-dimensional ReLU encoding,
//! * `G` predicts the moisture class from the encoding,
//! * `D` predicts whether an encoding came from the source (0) or the
//!   target (1) domain.
//!
//! `D` sits behind a gradient reversal layer. Backpropagating
//! `L_total = L_label + λ·L_domain` gives `G` and `D` their ordinary descent
//! gradients, while the reversal hands `F` the gradient of
//! `L_label - λ·L_domain`, pushing the encoding towards domain invariance.
//!
//! Target labels are never used. After the warm-up epochs the encoder is
//! scored by the AMI between `G`'s predicted target classes and a k-means
//! clustering of the target encodings, and the best-scoring epoch is kept.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifiers::argmax;
use crate::clustering::{ami, kmeans, KMeansConfig};
use crate::dataset::{Dataset, MoistureClass, Standardizer};
use crate::error::{arg, Error, Result};
use crate::nn::{
    binary_cross_entropy, cross_entropy, grl_backward, Activation, AdamConfig, AdamState, Gradients,
    LayerSpec, Network,
};

pub const ENCODING_DIM: usize = 32;
const HIDDEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lambda: f64,
    pub warmup_epochs: usize,
    pub clusters: usize,
    pub seed: u64,
    pub adam: AdamConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            batch_size: 2,
            lambda: 0.5,
            warmup_epochs: 15,
            clusters: 3,
            seed: 42,
            adam: AdamConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.warmup_epochs >= self.epochs {
            return arg(format!(
                "warm-up ({}) must be shorter than training ({} epochs)",
                self.warmup_epochs, self.epochs
            ));
        }
        if self.batch_size == 0 {
            return arg("batch size must be at least 1");
        }
        if self.clusters < 2 {
            return arg("need at least 2 clusters");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return arg(format!("lambda must be finite and >= 0, got {}", self.lambda));
        }
        Ok(())
    }
}

/// Trained (or freshly initialized) F/G/D networks with their input schema
/// and the standardizer fitted at training time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptMoistModel {
    pub schema: Vec<String>,
    pub lambda: f64,
    pub standardizer: Standardizer,
    #[serde(rename = "F")]
    pub f: Network,
    #[serde(rename = "G")]
    pub g: Network,
    #[serde(rename = "D")]
    pub d: Network,
}

/// Class probabilities and the argmax class of one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub probs: Vec<f64>,
    pub class: MoistureClass,
}

impl AdaptMoistModel {
    pub fn init(schema: Vec<String>, standardizer: Standardizer, lambda: f64, seed: u64) -> Result<Self> {
        let dim = schema.len();
        if dim == 0 || standardizer.mean.len() != dim {
            return arg("schema and standardizer must describe the same non-empty feature set");
        }
        Ok(Self {
            schema,
            lambda,
            standardizer,
            f: Network::init(&[LayerSpec::new(dim, ENCODING_DIM, Activation::Relu)], seed)?,
            g: Network::init(
                &[
                    LayerSpec::new(ENCODING_DIM, HIDDEN, Activation::Relu),
                    LayerSpec::new(HIDDEN, MoistureClass::COUNT, Activation::Softmax),
                ],
                seed.wrapping_add(1),
            )?,
            d: Network::init(
                &[
                    LayerSpec::new(ENCODING_DIM, HIDDEN, Activation::Relu),
                    LayerSpec::new(HIDDEN, 1, Activation::Sigmoid),
                ],
                seed.wrapping_add(2),
            )?,
        })
    }

    fn check_schema(&self, ds: &Dataset) -> Result<()> {
        if ds.schema() != self.schema.as_slice() {
            return arg(format!(
                "feature schema mismatch: model has {} features, data has {}",
                self.schema.len(),
                ds.dim()
            ));
        }
        Ok(())
    }

    /// Encoding of an already standardized feature vector.
    pub fn encode_standardized(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.f.predict(x)
    }

    /// Class probabilities of an already standardized feature vector.
    pub fn predict_standardized(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.g.predict(&self.f.predict(x)?)
    }

    /// 32-dimensional encodings of raw feature rows.
    pub fn encode(&self, ds: &Dataset) -> Result<Vec<Vec<f64>>> {
        self.check_schema(ds)?;
        ds.samples()
            .iter()
            .map(|s| self.encode_standardized(&self.standardizer.transform(&s.features)))
            .collect()
    }

    pub fn predict(&self, ds: &Dataset) -> Result<Vec<Prediction>> {
        self.check_schema(ds)?;
        ds.samples()
            .iter()
            .map(|s| {
                let probs = self.predict_standardized(&self.standardizer.transform(&s.features))?;
                if probs.iter().any(|p| !p.is_finite()) {
                    return Err(Error::Numeric(format!("non-finite prediction for '{}'", s.id)));
                }
                let class = MoistureClass::from_index(argmax(&probs)).unwrap();
                Ok(Prediction { probs, class })
            })
            .collect()
    }
}

/// How the domain gradient crosses from `D` into `F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrlMode {
    /// Multiply by `-λ` (training behaviour).
    Reverse,
    /// Pass through unchanged; used to check the reversal numerically.
    Identity,
}

/// Losses and parameter gradients of one paired mini-batch.
#[derive(Debug, Clone, PartialEq)]
pub struct StepGradients {
    pub label_loss: f64,
    pub domain_loss: f64,
    /// Gradient applied to `F`: label part plus the domain part.
    pub f: Gradients,
    /// The domain branch's contribution to `f`, after the GRL.
    pub f_from_domain: Gradients,
    pub g: Gradients,
    pub d: Gradients,
}

/// Computes the batch losses (means over the source batch for the label
/// loss and over the combined batch for the domain loss) and the gradients
/// of one training step. Inputs must already be standardized.
pub fn step_gradients(
    model: &AdaptMoistModel,
    source: &[&[f64]],
    labels: &[usize],
    target: &[&[f64]],
    mode: GrlMode,
) -> Result<StepGradients> {
    if source.is_empty() || source.len() != labels.len() || target.is_empty() {
        return arg("step needs non-empty source and target batches with one label per source row");
    }
    let mut out = StepGradients {
        label_loss: 0.0,
        domain_loss: 0.0,
        f: Gradients::zeros_like(&model.f),
        f_from_domain: Gradients::zeros_like(&model.f),
        g: Gradients::zeros_like(&model.g),
        d: Gradients::zeros_like(&model.d),
    };
    let ns = source.len() as f64;
    let nd = (source.len() + target.len()) as f64;

    let rows = source
        .iter()
        .map(|x| (x, 0.0, true))
        .chain(target.iter().map(|x| (x, 1.0, false)));
    let mut src_i = 0;
    for (x, domain, is_source) in rows {
        let f_acts = model.f.forward(x)?;
        let code = f_acts.last().unwrap();

        let d_acts = model.d.forward(code)?;
        let p = d_acts.last().unwrap()[0];
        out.domain_loss += binary_cross_entropy(p, domain) / nd;
        let (gd, grad_code) = model.d.backward_from_preactivation(&d_acts, &[(p - domain) / nd])?;
        out.d.add_scaled(&gd, model.lambda);
        let grad_code = match mode {
            GrlMode::Reverse => grl_backward(&grad_code, model.lambda),
            GrlMode::Identity => grad_code,
        };
        let (gf_dom, _) = model.f.backward(&f_acts, &grad_code)?;
        out.f_from_domain.add_scaled(&gf_dom, 1.0);

        if is_source {
            let y = labels[src_i];
            src_i += 1;
            let g_acts = model.g.forward(code)?;
            let probs = g_acts.last().unwrap();
            out.label_loss += cross_entropy(probs, y) / ns;
            let mut delta: Vec<f64> = probs.iter().map(|p| p / ns).collect();
            delta[y] -= 1.0 / ns;
            let (gg, grad_code) = model.g.backward_from_preactivation(&g_acts, &delta)?;
            out.g.add_scaled(&gg, 1.0);
            let (gf_label, _) = model.f.backward(&f_acts, &grad_code)?;
            out.f.add_scaled(&gf_label, 1.0);
        }
    }
    out.f.add_scaled(&out.f_from_domain, 1.0);
    Ok(out)
}

/// Per-epoch trace entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub label_loss: f64,
    pub domain_loss: f64,
    pub total_loss: f64,
    pub ami: Option<f64>,
    pub checkpointed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrainReport {
    pub config: TrainConfig,
    pub records: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_ami: f64,
}

/// Hooks into the training loop.
pub trait TrainObserver {
    fn on_step(&mut self, _epoch: usize, _step: usize, _grads: &StepGradients) {}
    fn on_epoch_end(&mut self, _model: &AdaptMoistModel, _record: &EpochRecord) {}
}

impl TrainObserver for () {}

/// Scores a model on standardized target rows: AMI between `G∘F` argmax
/// classes and a k-means clustering of the `F` encodings.
pub fn ami_callback(model: &AdaptMoistModel, target: &[Vec<f64>], clusters: usize, seed: u64) -> Result<f64> {
    if target.is_empty() {
        return arg("AMI callback needs target samples");
    }
    let codes = target
        .iter()
        .map(|x| model.encode_standardized(x))
        .collect::<Result<Vec<_>>>()?;
    let pseudo = kmeans(&codes, clusters.min(codes.len()), seed, KMeansConfig::default())?.assignments;
    let predicted = codes
        .iter()
        .map(|c| model.g.predict(c).map(|p| argmax(&p)))
        .collect::<Result<Vec<_>>>()?;
    if predicted.len() < 2 {
        return Ok(if predicted == pseudo { 1.0 } else { 0.0 });
    }
    ami(&predicted, &pseudo)
}

pub fn train_adaptmoist(
    source: &Dataset,
    target: &Dataset,
    cfg: &TrainConfig,
) -> Result<(AdaptMoistModel, TrainReport)> {
    train_adaptmoist_observed(source, target, cfg, &mut ())
}

pub fn train_adaptmoist_observed(
    source: &Dataset,
    target: &Dataset,
    cfg: &TrainConfig,
    observer: &mut dyn TrainObserver,
) -> Result<(AdaptMoistModel, TrainReport)> {
    cfg.validate()?;
    if source.is_empty() || target.is_empty() {
        return arg("source and target domains must both be non-empty");
    }
    if source.schema() != target.schema() {
        return arg("source and target feature schemas differ");
    }
    let labels = source.label_indices()?;
    for c in MoistureClass::ALL {
        if !labels.contains(&c.index()) {
            return arg(format!("source domain has no '{c}' samples"));
        }
    }

    let standardizer = Standardizer::fit(
        source
            .samples()
            .iter()
            .chain(target.samples())
            .map(|s| s.features.as_slice()),
    )?;
    let xs_s: Vec<Vec<f64>> = source.samples().iter().map(|s| standardizer.transform(&s.features)).collect();
    let xs_t: Vec<Vec<f64>> = target.samples().iter().map(|s| standardizer.transform(&s.features)).collect();

    let mut model = AdaptMoistModel::init(source.schema().to_vec(), standardizer, cfg.lambda, cfg.seed)?;
    let mut adam_f = AdamState::new(&model.f, cfg.adam);
    let mut adam_g = AdamState::new(&model.g, cfg.adam);
    let mut adam_d = AdamState::new(&model.d, cfg.adam);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(3);

    let (ns, nt, b) = (xs_s.len(), xs_t.len(), cfg.batch_size);
    let steps = ns.max(nt).div_ceil(b);
    let mut order_s: Vec<usize> = (0..ns).collect();
    let mut order_t: Vec<usize> = (0..nt).collect();
    let mut records = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(usize, f64, AdaptMoistModel)> = None;

    for epoch in 1..=cfg.epochs {
        order_s.shuffle(&mut rng);
        order_t.shuffle(&mut rng);
        let (mut label_sum, mut domain_sum) = (0.0, 0.0);
        for step in 0..steps {
            let pick = |order: &[usize], i: usize| order[(step * b + i) % order.len()];
            let src: Vec<&[f64]> = (0..b).map(|i| xs_s[pick(&order_s, i)].as_slice()).collect();
            let ys: Vec<usize> = (0..b).map(|i| labels[pick(&order_s, i)]).collect();
            let tgt: Vec<&[f64]> = (0..b).map(|i| xs_t[pick(&order_t, i)].as_slice()).collect();

            let grads = step_gradients(&model, &src, &ys, &tgt, GrlMode::Reverse)?;
            if !(grads.label_loss.is_finite() && grads.domain_loss.is_finite()) {
                return Err(Error::Numeric(format!("non-finite loss at epoch {epoch}, step {step}")));
            }
            observer.on_step(epoch, step, &grads);
            label_sum += grads.label_loss;
            domain_sum += grads.domain_loss;
            adam_f.step(&mut model.f, &grads.f)?;
            adam_g.step(&mut model.g, &grads.g)?;
            adam_d.step(&mut model.d, &grads.d)?;
        }

        let label_loss = label_sum / steps as f64;
        let domain_loss = domain_sum / steps as f64;
        let mut record = EpochRecord {
            epoch,
            label_loss,
            domain_loss,
            total_loss: label_loss + cfg.lambda * domain_loss,
            ami: None,
            checkpointed: false,
        };
        if epoch > cfg.warmup_epochs {
            let score = ami_callback(&model, &xs_t, cfg.clusters, cfg.seed.wrapping_add(epoch as u64))?;
            record.ami = Some(score);
            if best.as_ref().is_none_or(|(_, s, _)| score > *s) {
                record.checkpointed = true;
                best = Some((epoch, score, model.clone()));
            }
        }
        observer.on_epoch_end(&model, &record);
        records.push(record);
    }

    let (best_epoch, best_ami, final_model) = best.unwrap_or((cfg.epochs, f64::NAN, model));
    Ok((
        final_model,
        TrainReport {
            config: *cfg,
            records,
            best_epoch,
            best_ami,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(domain: &str, shift: f64, labeled: bool) -> Dataset {
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|i| {
                let c = (i % 3) as f64;
                vec![c + shift + 0.1 * (i as f64 / 3.0), -c + 0.05 * i as f64]
            })
            .collect();
        let labels: Vec<Option<MoistureClass>> = (0..12)
            .map(|i| labeled.then(|| MoistureClass::from_index(i % 3).unwrap()))
            .collect();
        Dataset::from_rows(vec!["a".into(), "b".into()], &rows, &labels, domain).unwrap()
    }

    fn short_cfg() -> TrainConfig {
        TrainConfig {
            epochs: 4,
            warmup_epochs: 2,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = [
            TrainConfig { warmup_epochs: 30, ..TrainConfig::default() },
            TrainConfig { batch_size: 0, ..TrainConfig::default() },
            TrainConfig { clusters: 1, ..TrainConfig::default() },
            TrainConfig { lambda: -0.1, ..TrainConfig::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err());
        }
    }

    #[test]
    fn input_errors() {
        let s = toy("s", 0.0, true);
        let t = toy("t", 1.0, false);
        assert!(train_adaptmoist(&s, &t, &short_cfg()).is_ok());
        assert!(train_adaptmoist(&t, &t, &short_cfg()).is_err(), "unlabeled source");
        let empty = Dataset::new(s.schema().to_vec(), vec![]).unwrap();
        assert!(train_adaptmoist(&s, &empty, &short_cfg()).is_err());
        let other = Dataset::from_rows(vec!["x".into(), "b".into()], &[vec![0.0, 0.0]], &[None], "t").unwrap();
        assert!(train_adaptmoist(&s, &other, &short_cfg()).is_err());
        let two_classes = s.subset(&[0, 1, 3, 4]);
        assert!(train_adaptmoist(&two_classes, &t, &short_cfg()).is_err());
    }

    #[test]
    fn report_shape() {
        let (_, rep) = train_adaptmoist(&toy("s", 0.0, true), &toy("t", 1.0, false), &short_cfg()).unwrap();
        assert_eq!(rep.records.len(), 4);
        assert!(rep.records[..2].iter().all(|r| r.ami.is_none() && !r.checkpointed));
        assert!(rep.records[2..].iter().all(|r| r.ami.is_some()));
        assert!(rep.best_epoch > 2);
        assert!(!rep.records[0].checkpointed);
    }

    #[test]
    fn encode_and_predict_shapes() {
        let s = toy("s", 0.0, true);
        let std = Standardizer::fit_dataset(&s).unwrap();
        let m = AdaptMoistModel::init(s.schema().to_vec(), std, 0.5, 1).unwrap();
        let codes = m.encode(&s).unwrap();
        assert!(codes.iter().all(|c| c.len() == ENCODING_DIM && c.iter().all(|&v| v >= 0.0)));
        let preds = m.predict(&s).unwrap();
        assert_eq!(preds.len(), s.len());
        let bad = Dataset::from_rows(vec!["q".into(), "b".into()], &[vec![0.0, 0.0]], &[None], "x").unwrap();
        assert!(m.encode(&bad).is_err());
        assert!(m.predict(&bad).is_err());
    }

    #[test]
    fn zero_logits_are_uniform() {
        let s = toy("s", 0.0, true);
        let std = Standardizer::fit_dataset(&s).unwrap();
        let mut m = AdaptMoistModel::init(s.schema().to_vec(), std, 0.5, 1).unwrap();
        let last = m.g.layers_mut().last_mut().unwrap();
        last.weights.iter_mut().for_each(|w| *w = 0.0);
        for p in m.predict(&s).unwrap() {
            assert_eq!(p.probs, vec![1.0 / 3.0; 3]);
            assert_eq!(p.class, MoistureClass::Dry);
        }
    }

    #[test]
    fn model_json_keys() {
        let s = toy("s", 0.0, true);
        let std = Standardizer::fit_dataset(&s).unwrap();
        let m = AdaptMoistModel::init(s.schema().to_vec(), std, 0.5, 1).unwrap();
        let v: serde_json::Value = serde_json::to_value(&m).unwrap();
        for k in ["schema", "lambda", "F", "G", "D"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        let back: AdaptMoistModel = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);
    }
}
