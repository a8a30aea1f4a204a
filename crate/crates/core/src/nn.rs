//! A small dense-network engine: forward pass, manual backpropagation,
//! gradient reversal, Adam and the two classification losses.
//!
//! All arithmetic is `f64`. Activations are cached per layer by
//! [`Network::forward`] and consumed by [`Network::backward`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};

const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Softmax,
    Sigmoid,
    Identity,
}

impl Activation {
    fn is_output_only(self) -> bool {
        matches!(self, Activation::Softmax | Activation::Sigmoid)
    }

    fn apply(self, z: &mut [f64]) {
        match self {
            Activation::Relu => z.iter_mut().for_each(|v| *v = v.max(0.0)),
            Activation::Identity => {}
            Activation::Sigmoid => z.iter_mut().for_each(|v| *v = sigmoid(*v)),
            Activation::Softmax => softmax_in_place(z),
        }
    }

    /// Maps a gradient w.r.t. the activation output `a` to a gradient w.r.t.
    /// the pre-activation.
    fn backprop(self, a: &[f64], grad: &[f64]) -> Vec<f64> {
        match self {
            Activation::Relu => a
                .iter()
                .zip(grad)
                .map(|(&a, &g)| if a > 0.0 { g } else { 0.0 })
                .collect(),
            Activation::Identity => grad.to_vec(),
            Activation::Sigmoid => a.iter().zip(grad).map(|(&a, &g)| g * a * (1.0 - a)).collect(),
            Activation::Softmax => {
                let dot: f64 = a.iter().zip(grad).map(|(a, g)| a * g).sum();
                a.iter().zip(grad).map(|(&a, &g)| a * (g - dot)).collect()
            }
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    z.iter_mut().for_each(|v| *v /= sum);
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let mut out = z.to_vec();
    softmax_in_place(&mut out);
    out
}

/// `-ln(probs[class])` with the probability clamped to `[1e-12, 1]`.
pub fn cross_entropy(probs: &[f64], class: usize) -> f64 {
    -probs[class].clamp(PROB_FLOOR, 1.0).ln()
}

/// `-(d ln p + (1-d) ln(1-p))` with `p` clamped to `[1e-12, 1-1e-12]`.
pub fn binary_cross_entropy(p: f64, d: f64) -> f64 {
    let p = p.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
    -(d * p.ln() + (1.0 - d) * (1.0 - p).ln())
}

/// Backward pass of the gradient reversal layer. Its forward pass is the
/// identity.
pub fn grl_backward(grad: &[f64], lambda: f64) -> Vec<f64> {
    grad.iter().map(|g| -lambda * g).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        Self {
            in_dim,
            out_dim,
            activation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DenseLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
    /// `out_dim × in_dim`, row-major.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl DenseLayer {
    fn check(&self) -> Result<()> {
        if self.in_dim == 0 || self.out_dim == 0 {
            return arg("layer dimensions must be positive");
        }
        if self.weights.len() != self.in_dim * self.out_dim || self.biases.len() != self.out_dim {
            return arg(format!(
                "layer {}->{} has {} weights and {} biases",
                self.in_dim,
                self.out_dim,
                self.weights.len(),
                self.biases.len()
            ));
        }
        if self.weights.iter().chain(&self.biases).any(|v| !v.is_finite()) {
            return arg("layer parameters must be finite");
        }
        Ok(())
    }

    fn affine(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.in_dim)
            .zip(&self.biases)
            .map(|(row, b)| row.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + b)
            .collect()
    }
}

/// A chain of dense layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<DenseLayer>", into = "Vec<DenseLayer>")]
pub struct Network {
    layers: Vec<DenseLayer>,
}

impl TryFrom<Vec<DenseLayer>> for Network {
    type Error = crate::Error;

    fn try_from(layers: Vec<DenseLayer>) -> Result<Self> {
        Network::new(layers)
    }
}

impl From<Network> for Vec<DenseLayer> {
    fn from(n: Network) -> Self {
        n.layers
    }
}

/// Per-layer parameter gradients, shaped like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrads>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(net: &Network) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGrads {
                    weights: vec![0.0; l.weights.len()],
                    biases: vec![0.0; l.biases.len()],
                })
                .collect(),
        }
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &Gradients, scale: f64) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights.iter_mut().zip(&b.weights).for_each(|(x, y)| *x += scale * y);
            a.biases.iter_mut().zip(&b.biases).for_each(|(x, y)| *x += scale * y);
        }
    }

    pub fn scale(&mut self, s: f64) {
        for l in &mut self.layers {
            l.weights.iter_mut().chain(l.biases.iter_mut()).for_each(|v| *v *= s);
        }
    }

    /// Flattened in the same order as [`Network::params`].
    pub fn flat(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.flat().iter().all(|&v| v == 0.0)
    }

    fn same_shape(&self, net: &Network) -> bool {
        self.layers.len() == net.layers.len()
            && self
                .layers
                .iter()
                .zip(&net.layers)
                .all(|(g, l)| g.weights.len() == l.weights.len() && g.biases.len() == l.biases.len())
    }
}

impl Network {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return arg("network needs at least one layer");
        }
        for (k, l) in layers.iter().enumerate() {
            l.check()?;
            if l.activation.is_output_only() && k + 1 != layers.len() {
                return arg(format!("{:?} may only be the final activation", l.activation));
            }
            if k > 0 && layers[k - 1].out_dim != l.in_dim {
                return arg(format!(
                    "layer {k} expects {} inputs but the previous layer emits {}",
                    l.in_dim,
                    layers[k - 1].out_dim
                ));
            }
        }
        Ok(Self { layers })
    }

    /// Glorot-uniform weights drawn from a generator seeded with `seed`;
    /// zero biases.
    pub fn init(spec: &[LayerSpec], seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = spec
            .iter()
            .map(|s| {
                let limit = (6.0 / (s.in_dim + s.out_dim) as f64).sqrt();
                DenseLayer {
                    in_dim: s.in_dim,
                    out_dim: s.out_dim,
                    activation: s.activation,
                    weights: (0..s.in_dim * s.out_dim)
                        .map(|_| rng.random_range(-limit..limit))
                        .collect(),
                    biases: vec![0.0; s.out_dim],
                }
            })
            .collect();
        Self::new(layers)
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// All parameters, layer by layer, weights before biases.
    pub fn params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
            .collect()
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.biases.iter_mut()))
    }

    /// Overwrites all parameters from a flat vector in [`Network::params`] order.
    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.parameter_count() {
            return arg(format!(
                "expected {} parameters, got {}",
                self.parameter_count(),
                flat.len()
            ));
        }
        self.params_mut().zip(flat).for_each(|(p, &v)| *p = v);
        Ok(())
    }

    /// Returns the activations of every layer; element 0 is the input and
    /// the last element is the network output.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        if x.len() != self.input_dim() {
            return arg(format!(
                "input has {} values, network expects {}",
                x.len(),
                self.input_dim()
            ));
        }
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        for l in &self.layers {
            let mut z = l.affine(acts.last().unwrap());
            l.activation.apply(&mut z);
            acts.push(z);
        }
        Ok(acts)
    }

    /// Network output only.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.pop().unwrap())
    }

    /// Backpropagates a gradient w.r.t. the network output. Returns parameter
    /// gradients and the gradient w.r.t. the input.
    pub fn backward(&self, acts: &[Vec<f64>], output_grad: &[f64]) -> Result<(Gradients, Vec<f64>)> {
        self.check_acts(acts, output_grad)?;
        let last = self.layers.last().unwrap();
        let delta = last.activation.backprop(acts.last().unwrap(), output_grad);
        Ok(self.backward_core(acts, delta))
    }

    /// Like [`Network::backward`], but `preact_grad` is already the gradient
    /// w.r.t. the final pre-activation. For softmax + cross-entropy and
    /// sigmoid + binary cross-entropy this is `ŷ - y`.
    pub fn backward_from_preactivation(
        &self,
        acts: &[Vec<f64>],
        preact_grad: &[f64],
    ) -> Result<(Gradients, Vec<f64>)> {
        self.check_acts(acts, preact_grad)?;
        Ok(self.backward_core(acts, preact_grad.to_vec()))
    }

    fn check_acts(&self, acts: &[Vec<f64>], grad: &[f64]) -> Result<()> {
        if acts.len() != self.layers.len() + 1
            || acts.iter().skip(1).zip(&self.layers).any(|(a, l)| a.len() != l.out_dim)
            || acts[0].len() != self.input_dim()
        {
            return arg("activations do not match the network");
        }
        if grad.len() != self.output_dim() {
            return arg(format!(
                "output gradient has {} values, network emits {}",
                grad.len(),
                self.output_dim()
            ));
        }
        Ok(())
    }

    fn backward_core(&self, acts: &[Vec<f64>], mut delta: Vec<f64>) -> (Gradients, Vec<f64>) {
        let mut grads = Gradients::zeros_like(self);
        let mut input_grad = Vec::new();
        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            let x = &acts[k];
            let g = &mut grads.layers[k];
            let mut gx = vec![0.0; layer.in_dim];
            for (o, &d) in delta.iter().enumerate() {
                g.biases[o] = d;
                if d == 0.0 {
                    continue;
                }
                let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                let grow = &mut g.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                for i in 0..layer.in_dim {
                    grow[i] = d * x[i];
                    gx[i] += row[i] * d;
                }
            }
            if k == 0 {
                input_grad = gx;
            } else {
                delta = self.layers[k - 1].activation.backprop(x, &gx);
            }
        }
        (grads, input_grad)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam moment estimates for one network.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step: u64,
    m: Gradients,
    v: Gradients,
}

impl AdamState {
    pub fn new(net: &Network, config: AdamConfig) -> Self {
        Self {
            config,
            step: 0,
            m: Gradients::zeros_like(net),
            v: Gradients::zeros_like(net),
        }
    }

    /// One bias-corrected Adam update of `net`.
    pub fn step(&mut self, net: &mut Network, grads: &Gradients) -> Result<()> {
        if !grads.same_shape(net) || !self.m.same_shape(net) {
            return arg("gradient shape does not match the network");
        }
        self.step += 1;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let c1 = 1.0 - beta1.powi(self.step as i32);
        let c2 = 1.0 - beta2.powi(self.step as i32);
        for (k, layer) in net.layers.iter_mut().enumerate() {
            let g = &grads.layers[k];
            let m = &mut self.m.layers[k];
            let v = &mut self.v.layers[k];
            let params = layer.weights.iter_mut().chain(layer.biases.iter_mut());
            let gs = g.weights.iter().chain(&g.biases);
            let ms = m.weights.iter_mut().chain(m.biases.iter_mut());
            let vs = v.weights.iter_mut().chain(v.biases.iter_mut());
            for (((p, &g), m), v) in params.zip(gs).zip(ms).zip(vs) {
                *m = beta1 * *m + (1.0 - beta1) * g;
                *v = beta2 * *v + (1.0 - beta2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *p -= lr * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }
}
