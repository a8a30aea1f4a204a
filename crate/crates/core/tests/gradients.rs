//! Analytic gradients against central finite differences.

use moistkit::adapt::{step_gradients, AdaptMoistModel, GrlMode};
use moistkit::nn::{binary_cross_entropy, cross_entropy, Activation, LayerSpec, Network};
use moistkit::Standardizer;
use moistkit_oracle::central_difference;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-5;

fn fd_close(analytic: &[f64], numeric: &[f64]) -> Result<(), String> {
    for (k, (a, n)) in analytic.iter().zip(numeric).enumerate() {
        if (a - n).abs() > 1e-4 * a.abs().max(n.abs()) + 1e-9 {
            return Err(format!("param {k}: analytic {a} vs numeric {n}"));
        }
    }
    Ok(())
}

/// Smallest |pre-activation| of any ReLU unit; finite differences are
/// meaningless near a kink.
fn relu_margin(net: &Network, x: &[f64]) -> f64 {
    let acts = net.forward(x).unwrap();
    let mut margin = f64::INFINITY;
    for (layer, input) in net.layers().iter().zip(&acts) {
        if layer.activation != Activation::Relu {
            continue;
        }
        for o in 0..layer.out_dim {
            let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
            let z = layer.biases[o] + row.iter().zip(input).map(|(w, v)| w * v).sum::<f64>();
            margin = margin.min(z.abs());
        }
    }
    margin
}

fn randomize_biases(net: &mut Network, rng: &mut ChaCha8Rng) {
    for layer in net.layers_mut() {
        layer.biases.iter_mut().for_each(|b| *b = rng.random_range(-0.5..0.5));
    }
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-2.0..2.0)).collect()
}

#[test]
fn generic_output_gradient_through_every_activation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for act in [Activation::Identity, Activation::Relu, Activation::Sigmoid, Activation::Softmax] {
        for trial in 0..10 {
            let spec = [LayerSpec::new(4, 5, Activation::Relu), LayerSpec::new(5, 3, act)];
            let mut net = Network::init(&spec, trial).unwrap();
            randomize_biases(&mut net, &mut rng);
            let x = random_vec(&mut rng, 4);
            if relu_margin(&net, &x) < 1e-3 {
                continue;
            }
            let c = random_vec(&mut rng, 3);
            let loss = |n: &Network| n.predict(&x).unwrap().iter().zip(&c).map(|(y, c)| y * c).sum::<f64>();
            let (grads, _) = net.backward(&net.forward(&x).unwrap(), &c).unwrap();
            let base = net.params();
            let numeric = central_difference(
                &mut |p| {
                    let mut n = net.clone();
                    n.set_params(p).unwrap();
                    loss(&n)
                },
                &base,
                H,
            );
            fd_close(&grads.flat(), &numeric).unwrap_or_else(|e| panic!("{act:?} trial {trial}: {e}"));
        }
    }
}

#[test]
fn input_gradient_matches() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let net = Network::init(
        &[LayerSpec::new(3, 4, Activation::Identity), LayerSpec::new(4, 2, Activation::Sigmoid)],
        3,
    )
    .unwrap();
    let x = random_vec(&mut rng, 3);
    let c = [0.7, -1.3];
    let (_, gx) = net.backward(&net.forward(&x).unwrap(), &c).unwrap();
    let numeric = central_difference(
        &mut |x| net.predict(x).unwrap().iter().zip(&c).map(|(y, c)| y * c).sum(),
        &x,
        H,
    );
    fd_close(&gx, &numeric).unwrap();
}

#[test]
fn fused_softmax_and_sigmoid_losses() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for trial in 0..10 {
        let mut g = Network::init(
            &[LayerSpec::new(6, 4, Activation::Relu), LayerSpec::new(4, 3, Activation::Softmax)],
            trial,
        )
        .unwrap();
        let mut d = Network::init(
            &[LayerSpec::new(6, 4, Activation::Relu), LayerSpec::new(4, 1, Activation::Sigmoid)],
            trial + 100,
        )
        .unwrap();
        randomize_biases(&mut g, &mut rng);
        randomize_biases(&mut d, &mut rng);
        let x = random_vec(&mut rng, 6);
        if relu_margin(&g, &x).min(relu_margin(&d, &x)) < 1e-3 {
            continue;
        }
        let y = trial as usize % 3;
        let acts = g.forward(&x).unwrap();
        let mut delta = acts.last().unwrap().clone();
        delta[y] -= 1.0;
        let (gg, _) = g.backward_from_preactivation(&acts, &delta).unwrap();
        let numeric = central_difference(
            &mut |p| {
                let mut n = g.clone();
                n.set_params(p).unwrap();
                cross_entropy(&n.predict(&x).unwrap(), y)
            },
            &g.params(),
            H,
        );
        fd_close(&gg.flat(), &numeric).unwrap();

        let dom = (trial % 2) as f64;
        let acts = d.forward(&x).unwrap();
        let p = acts.last().unwrap()[0];
        let (gd, _) = d.backward_from_preactivation(&acts, &[p - dom]).unwrap();
        let numeric = central_difference(
            &mut |q| {
                let mut n = d.clone();
                n.set_params(q).unwrap();
                binary_cross_entropy(n.predict(&x).unwrap()[0], dom)
            },
            &d.params(),
            H,
        );
        fd_close(&gd.flat(), &numeric).unwrap();
    }
}

struct Probe {
    model: AdaptMoistModel,
    source: Vec<Vec<f64>>,
    labels: Vec<usize>,
    target: Vec<Vec<f64>>,
}

impl Probe {
    fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = 5;
        let std = Standardizer { mean: vec![0.0; dim], std: vec![1.0; dim] };
        let lambda = rng.random_range(0.1..1.0);
        let mut model = AdaptMoistModel::init((0..dim).map(|i| format!("f{i}")).collect(), std, lambda, seed).unwrap();
        for net in [&mut model.f, &mut model.g, &mut model.d] {
            randomize_biases(net, &mut rng);
        }
        let source: Vec<Vec<f64>> = (0..2).map(|_| random_vec(&mut rng, dim)).collect();
        let target: Vec<Vec<f64>> = (0..2).map(|_| random_vec(&mut rng, dim)).collect();
        let labels = (0..2).map(|_| rng.random_range(0..3)).collect();
        Self { model, source, labels, target }
    }

    fn smooth(&self) -> bool {
        let m = &self.model;
        self.source.iter().chain(&self.target).all(|x| {
            let code = m.f.predict(x).unwrap();
            relu_margin(&m.f, x) > 1e-3 && relu_margin(&m.g, &code) > 1e-3 && relu_margin(&m.d, &code) > 1e-3
        })
    }

    fn losses(&self, model: &AdaptMoistModel) -> (f64, f64) {
        let s = step_gradients(model, &self.refs(&self.source), &self.labels, &self.refs(&self.target), GrlMode::Identity).unwrap();
        (s.label_loss, s.domain_loss)
    }

    fn refs<'a>(&self, rows: &'a [Vec<f64>]) -> Vec<&'a [f64]> {
        rows.iter().map(|r| r.as_slice()).collect()
    }
}

fn numeric_grad(
    probe: &Probe,
    which: usize,
    objective: &dyn Fn(f64, f64) -> f64,
) -> Vec<f64> {
    let net = |m: &AdaptMoistModel| [&m.f, &m.g, &m.d][which].clone();
    central_difference(
        &mut |p| {
            let mut m = probe.model.clone();
            let target = [&mut m.f, &mut m.g, &mut m.d];
            let n = target.into_iter().nth(which).unwrap();
            n.set_params(p).unwrap();
            let (l, d) = probe.losses(&m);
            objective(l, d)
        },
        &net(&probe.model).params(),
        H,
    )
}

#[test]
fn adaptation_step_gradients() {
    let mut checked = 0;
    for seed in 0..200 {
        if checked == 50 {
            break;
        }
        let probe = Probe::new(seed);
        if !probe.smooth() {
            continue;
        }
        checked += 1;
        let lambda = probe.model.lambda;
        let src = probe.refs(&probe.source);
        let tgt = probe.refs(&probe.target);
        let rev = step_gradients(&probe.model, &src, &probe.labels, &tgt, GrlMode::Reverse).unwrap();
        let ident = step_gradients(&probe.model, &src, &probe.labels, &tgt, GrlMode::Identity).unwrap();

        fd_close(&rev.g.flat(), &numeric_grad(&probe, 1, &|l, _| l)).unwrap();
        fd_close(&rev.d.flat(), &numeric_grad(&probe, 2, &|l, d| l + lambda * d)).unwrap();
        fd_close(&rev.f.flat(), &numeric_grad(&probe, 0, &|l, d| l - lambda * d)).unwrap();
        fd_close(&ident.f.flat(), &numeric_grad(&probe, 0, &|l, d| l + d)).unwrap();

        for (r, i) in rev.f_from_domain.flat().iter().zip(ident.f_from_domain.flat()) {
            assert!((r + lambda * i).abs() <= 1e-9 * r.abs().max(1e-12), "{r} vs -λ·{i}");
        }
    }
    assert_eq!(checked, 50, "not enough smooth probes");
}
