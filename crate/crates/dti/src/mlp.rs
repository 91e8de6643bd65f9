//! From-scratch feedforward network for scalar regression.
//!
//! Hidden layers use ReLU, the output layer is linear, the loss is mean
//! squared error, and training is plain SGD with momentum over shuffled
//! mini-batches. Everything is f64 and bit-for-bit deterministic given
//! (seed, data, config).

use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default hidden layout behind a d-dimensional input: 128, 64, 32, 1.
pub const DEFAULT_HIDDEN: [usize; 3] = [128, 64, 32];

/// Weight matrices are row-major `out x in`; biases one vector per layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layer_sizes: Vec<usize>,
    /// weights[k] has layer_sizes[k+1] rows of layer_sizes[k] columns.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    /// Hidden activation tag; the output layer is always linear.
    pub activation: String,
}

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub momentum: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 1000,
            learning_rate: 1e-3,
            batch_size: 8,
            momentum: 0.9,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::validation("epochs must be positive"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::validation("learning_rate must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::validation("batch_size must be positive"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::validation("momentum must lie in [0,1)"));
        }
        Ok(())
    }
}

/// A reported estimate, clamped onto the index scale at the reporting
/// boundary only; raw network outputs stay unclamped for loss purposes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub value: f64,
}

impl Prediction {
    pub fn from_raw(raw: f64) -> Self {
        Prediction {
            value: raw.clamp(0.0, 100.0),
        }
    }
}

/// Parameter count over consecutive layer pairs: sum of in*out + out.
pub fn param_count(layer_sizes: &[usize]) -> Result<usize> {
    per_layer_param_counts(layer_sizes).map(|counts| counts.iter().sum())
}

/// Per-layer parameter counts, in layer order.
pub fn per_layer_param_counts(layer_sizes: &[usize]) -> Result<Vec<usize>> {
    if layer_sizes.len() < 2 {
        return Err(Error::validation(format!(
            "a network needs at least 2 layers, got {}",
            layer_sizes.len()
        )));
    }
    if layer_sizes.iter().any(|&s| s == 0) {
        return Err(Error::validation("layer sizes must be positive"));
    }
    Ok(layer_sizes
        .windows(2)
        .map(|pair| pair[0] * pair[1] + pair[1])
        .collect())
}

/// Per-layer forward cache: activations after every layer, plus the
/// pre-activation values hidden layers need for the ReLU subgradient.
pub struct ForwardCache {
    /// activations[0] is the input; activations[k+1] the output of layer k.
    pub activations: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> f64 {
        self.activations.last().expect("nonempty")[0]
    }
}

/// Gradients with the same shapes as the model parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    fn zeros_like(model: &MlpModel) -> Self {
        Gradients {
            weights: model.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    fn add_scaled(&mut self, other: &Gradients, scale: f64) {
        for (acc, g) in self.weights.iter_mut().zip(&other.weights) {
            for (a, x) in acc.iter_mut().zip(g) {
                *a += scale * x;
            }
        }
        for (acc, g) in self.biases.iter_mut().zip(&other.biases) {
            for (a, x) in acc.iter_mut().zip(g) {
                *a += scale * x;
            }
        }
    }
}

impl MlpModel {
    /// He-uniform initialization (fan-in) for the ReLU stack, zero
    /// biases. The last layer size must be 1 (scalar regression).
    pub fn init(layer_sizes: &[usize], seed: u64) -> Result<Self> {
        per_layer_param_counts(layer_sizes)?;
        if *layer_sizes.last().unwrap() != 1 {
            return Err(Error::validation(format!(
                "output layer must have exactly 1 unit, got {}",
                layer_sizes.last().unwrap()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let limit = (6.0 / fan_in as f64).sqrt();
            let w: Vec<f64> = (0..fan_in * fan_out)
                .map(|_| rng.random_range(-limit..limit))
                .collect();
            weights.push(w);
            biases.push(vec![0.0; fan_out]);
        }
        Ok(MlpModel {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
            activation: "relu".to_string(),
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    /// Actual stored parameter count; must always agree with
    /// [`param_count`] on the same layout.
    pub fn stored_param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Affine + ReLU composition, linear last layer.
    pub fn forward(&self, x: &[f64]) -> Result<ForwardCache> {
        if x.len() != self.input_dim() {
            return Err(Error::validation(format!(
                "input has {} components, network expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        let n_layers = self.weights.len();
        let mut activations = Vec::with_capacity(n_layers + 1);
        activations.push(x.to_vec());
        for layer in 0..n_layers {
            let last = layer == n_layers - 1;
            let input = &activations[layer];
            let fan_in = self.layer_sizes[layer];
            let fan_out = self.layer_sizes[layer + 1];
            let w = &self.weights[layer];
            let mut out = Vec::with_capacity(fan_out);
            for unit in 0..fan_out {
                let row = &w[unit * fan_in..(unit + 1) * fan_in];
                let mut z = self.biases[layer][unit];
                for (wi, xi) in row.iter().zip(input) {
                    z += wi * xi;
                }
                out.push(if last { z } else { z.max(0.0) });
            }
            activations.push(out);
        }
        Ok(ForwardCache { activations })
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        Ok(Prediction::from_raw(self.forward(x)?.output()))
    }

    /// Exact gradients of the per-sample loss 0.5*(y_hat - y)^2 for every
    /// weight and bias. ReLU subgradient at 0 is defined as 0.
    pub fn backward(&self, cache: &ForwardCache, target: f64) -> Gradients {
        let n_layers = self.weights.len();
        let mut grads = Gradients::zeros_like(self);
        // delta for the linear scalar output
        let mut delta = vec![cache.output() - target];
        for layer in (0..n_layers).rev() {
            let fan_in = self.layer_sizes[layer];
            let fan_out = self.layer_sizes[layer + 1];
            let input = &cache.activations[layer];
            for unit in 0..fan_out {
                let d = delta[unit];
                grads.biases[layer][unit] = d;
                let row = &mut grads.weights[layer][unit * fan_in..(unit + 1) * fan_in];
                for (slot, xi) in row.iter_mut().zip(input) {
                    *slot = d * xi;
                }
            }
            if layer > 0 {
                // propagate through the ReLU of the previous layer:
                // its activation is relu(z), so activation > 0 <=> z > 0
                let mut next = vec![0.0f64; fan_in];
                let w = &self.weights[layer];
                for (unit, d) in delta.iter().enumerate() {
                    let row = &w[unit * fan_in..(unit + 1) * fan_in];
                    for (slot, wi) in next.iter_mut().zip(row) {
                        *slot += d * wi;
                    }
                }
                for (slot, a) in next.iter_mut().zip(input) {
                    if *a <= 0.0 {
                        *slot = 0.0;
                    }
                }
                delta = next;
            }
        }
        grads
    }

    /// Persists the model as JSON.
    pub fn save(&self, path: impl AsRef<Path>, trained_with: Option<&TrainConfig>) -> Result<()> {
        let path = path.as_ref();
        let artifact = ModelArtifact {
            model: self.clone(),
            train_config: trained_with.cloned(),
        };
        let json = serde_json::to_string_pretty(&artifact)
            .map_err(|e| Error::data(format!("serialize model: {e}")))?;
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let artifact: ModelArtifact = serde_json::from_str(&raw).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            msg: e.to_string(),
        })?;
        let model = artifact.model;
        let expected = param_count(&model.layer_sizes)?;
        if model.stored_param_count() != expected {
            return Err(Error::validation(format!(
                "model artifact is inconsistent: {} stored parameters, layout implies {expected}",
                model.stored_param_count()
            )));
        }
        Ok(model)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelArtifact {
    model: MlpModel,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    train_config: Option<TrainConfig>,
}

/// Mini-batch SGD with momentum. The shuffle order is a pure function of
/// (seed, epoch). Returns the per-epoch mean-squared-error trace.
pub fn train(
    model: &mut MlpModel,
    data: &[(Vec<f64>, f64)],
    cfg: &TrainConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::validation("training data is empty"));
    }
    for (x, _) in data {
        if x.len() != model.input_dim() {
            return Err(Error::validation(format!(
                "training vector has {} components, network expects {}",
                x.len(),
                model.input_dim()
            )));
        }
    }

    let n = data.len();
    let mut velocity = Gradients::zeros_like(model);
    let mut trace = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..n).collect();

    for epoch in 0..cfg.epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(epoch as u64 + 1);
        order.shuffle(&mut rng);

        let mut epoch_sq_err = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let mut batch_grads = Gradients::zeros_like(model);
            let inv = 1.0 / batch.len() as f64;
            for &idx in batch {
                let (x, y) = &data[idx];
                let cache = model.forward(x)?;
                let residual = cache.output() - y;
                epoch_sq_err += residual * residual;
                let grads = model.backward(&cache, *y);
                batch_grads.add_scaled(&grads, inv);
            }
            // momentum update: v = m*v - lr*g ; p += v
            for layer in 0..model.weights.len() {
                for (slot, (v, g)) in model.weights[layer].iter_mut().zip(
                    velocity.weights[layer]
                        .iter_mut()
                        .zip(&batch_grads.weights[layer]),
                ) {
                    *v = cfg.momentum * *v - cfg.learning_rate * g;
                    *slot += *v;
                }
                for (slot, (v, g)) in model.biases[layer].iter_mut().zip(
                    velocity.biases[layer]
                        .iter_mut()
                        .zip(&batch_grads.biases[layer]),
                ) {
                    *v = cfg.momentum * *v - cfg.learning_rate * g;
                    *slot += *v;
                }
            }
        }
        let epoch_mse = epoch_sq_err / n as f64;
        if !epoch_mse.is_finite() {
            return Err(Error::Diverged {
                epoch,
                learning_rate: cfg.learning_rate,
            });
        }
        trace.push(epoch_mse);
    }
    Ok(trace)
}

/// Mean absolute error.
pub fn mae(preds: &[f64], targets: &[f64]) -> Result<f64> {
    check_pair(preds, targets)?;
    Ok(preds
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t).abs())
        .sum::<f64>()
        / preds.len() as f64)
}

/// Root mean squared error.
pub fn rmse(preds: &[f64], targets: &[f64]) -> Result<f64> {
    check_pair(preds, targets)?;
    Ok((preds
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / preds.len() as f64)
        .sqrt())
}

fn check_pair(preds: &[f64], targets: &[f64]) -> Result<()> {
    if preds.is_empty() {
        return Err(Error::validation("metric over empty prediction list"));
    }
    if preds.len() != targets.len() {
        return Err(Error::validation(format!(
            "{} predictions vs {} targets",
            preds.len(),
            targets.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn param_count_reproduces_published_architecture() {
        let per_layer = per_layer_param_counts(&[73, 128, 64, 32, 1]).unwrap();
        assert_eq!(per_layer, vec![9472, 8256, 2080, 33]);
        assert_eq!(param_count(&[73, 128, 64, 32, 1]).unwrap(), 19_841);
    }

    #[test]
    fn param_count_basics() {
        assert_eq!(param_count(&[10, 1]).unwrap(), 11);
        assert_eq!(param_count(&[2, 3, 1]).unwrap(), 13);
        assert!(param_count(&[5]).is_err());
        assert!(param_count(&[5, 0, 1]).is_err());
    }

    #[test]
    fn param_count_agrees_with_storage_for_random_layouts() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let n_layers = rng.random_range(2..5usize);
            let mut sizes: Vec<usize> = (0..n_layers).map(|_| rng.random_range(1..20)).collect();
            *sizes.last_mut().unwrap() = 1;
            let model = MlpModel::init(&sizes, rng.random()).unwrap();
            assert_eq!(model.stored_param_count(), param_count(&sizes).unwrap());
        }
    }

    #[test]
    fn forward_zero_parameters_outputs_zero() {
        let mut model = MlpModel::init(&[3, 4, 1], 0).unwrap();
        for w in &mut model.weights {
            w.iter_mut().for_each(|x| *x = 0.0);
        }
        assert_eq!(model.forward(&[1.0, -2.0, 3.0]).unwrap().output(), 0.0);
    }

    #[test]
    fn identity_like_single_unit() {
        let model = MlpModel {
            layer_sizes: vec![1, 1],
            weights: vec![vec![1.0]],
            biases: vec![vec![0.0]],
            activation: "relu".into(),
        };
        assert_eq!(model.forward(&[5.0]).unwrap().output(), 5.0);
    }

    #[test]
    fn forward_rejects_dimension_mismatch() {
        let model = MlpModel::init(&[3, 2, 1], 0).unwrap();
        assert!(model.forward(&[1.0, 2.0]).is_err());
    }

    /// Naive straight-line matrix multiply, written independently of the
    /// implementation above.
    fn naive_forward(model: &MlpModel, x: &[f64]) -> f64 {
        let mut a: Vec<f64> = x.to_vec();
        for layer in 0..model.weights.len() {
            let fan_in = model.layer_sizes[layer];
            let fan_out = model.layer_sizes[layer + 1];
            let mut next = vec![0.0; fan_out];
            for o in 0..fan_out {
                let mut z = model.biases[layer][o];
                for i in 0..fan_in {
                    z += model.weights[layer][o * fan_in + i] * a[i];
                }
                next[o] = if layer + 1 == model.weights.len() {
                    z
                } else if z > 0.0 {
                    z
                } else {
                    0.0
                };
            }
            a = next;
        }
        a[0]
    }

    #[test]
    fn forward_matches_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let sizes = vec![
                rng.random_range(1..6usize),
                rng.random_range(1..8usize),
                rng.random_range(1..8usize),
                1,
            ];
            let model = MlpModel::init(&sizes, rng.random()).unwrap();
            let x: Vec<f64> = (0..sizes[0]).map(|_| rng.random_range(-2.0..2.0)).collect();
            let got = model.forward(&x).unwrap().output();
            let want = naive_forward(&model, &x);
            assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn zero_residual_means_zero_gradients() {
        let model = MlpModel::init(&[2, 3, 1], 7).unwrap();
        let x = [0.3, 0.7];
        let cache = model.forward(&x).unwrap();
        let grads = model.backward(&cache, cache.output());
        for g in grads.weights.iter().chain(grads.biases.iter()) {
            assert!(g.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn linear_model_gradient_closed_form() {
        // single linear layer: d/dw of 0.5*(wx+b-y)^2 = (y_hat-y)*x
        let model = MlpModel {
            layer_sizes: vec![2, 1],
            weights: vec![vec![0.5, -1.0]],
            biases: vec![vec![0.25]],
            activation: "relu".into(),
        };
        let x = [2.0, 3.0];
        let y = 1.0;
        let cache = model.forward(&x).unwrap();
        let y_hat = 0.5 * 2.0 - 1.0 * 3.0 + 0.25;
        assert!((cache.output() - y_hat).abs() < 1e-15);
        let grads = model.backward(&cache, y);
        let residual = y_hat - y;
        assert!((grads.weights[0][0] - residual * 2.0).abs() < 1e-12);
        assert!((grads.weights[0][1] - residual * 3.0).abs() < 1e-12);
        assert!((grads.biases[0][0] - residual).abs() < 1e-12);
    }

    /// Central finite differences over every parameter of random small
    /// networks. Inputs avoid exact ReLU kinks by construction (random
    /// continuous values make z = 0 a measure-zero event, and the check
    /// tolerates the odd near-kink parameter via the absolute floor).
    #[test]
    fn backprop_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let mut checked_pairs = 0;
        while checked_pairs < 200 {
            let sizes = vec![
                rng.random_range(1..5usize),
                rng.random_range(2..6usize),
                rng.random_range(1..5usize),
                1,
            ];
            let mut model = MlpModel::init(&sizes, rng.random()).unwrap();
            for b in &mut model.biases {
                for v in b.iter_mut() {
                    *v = rng.random_range(-0.5..0.5);
                }
            }
            let x: Vec<f64> = (0..sizes[0]).map(|_| rng.random_range(-1.5..1.5)).collect();
            let y = rng.random_range(-2.0..2.0);

            let cache = model.forward(&x).unwrap();
            let analytic = model.backward(&cache, y);
            let h = 1e-5;
            let loss =
                |m: &MlpModel| -> f64 { 0.5 * (m.forward(&x).unwrap().output() - y).powi(2) };

            for layer in 0..model.weights.len() {
                for slot in 0..model.weights[layer].len() {
                    let orig = model.weights[layer][slot];
                    model.weights[layer][slot] = orig + h;
                    let up = loss(&model);
                    model.weights[layer][slot] = orig - h;
                    let down = loss(&model);
                    model.weights[layer][slot] = orig;
                    let numeric = (up - down) / (2.0 * h);
                    let a = analytic.weights[layer][slot];
                    let err = (a - numeric).abs();
                    let tol = 1e-4 * numeric.abs().max(a.abs()).max(1e-3) + 1e-7;
                    assert!(err <= tol, "w[{layer}][{slot}]: {a} vs {numeric}");
                }
                for slot in 0..model.biases[layer].len() {
                    let orig = model.biases[layer][slot];
                    model.biases[layer][slot] = orig + h;
                    let up = loss(&model);
                    model.biases[layer][slot] = orig - h;
                    let down = loss(&model);
                    model.biases[layer][slot] = orig;
                    let numeric = (up - down) / (2.0 * h);
                    let a = analytic.biases[layer][slot];
                    let err = (a - numeric).abs();
                    let tol = 1e-4 * numeric.abs().max(a.abs()).max(1e-3) + 1e-7;
                    assert!(err <= tol, "b[{layer}][{slot}]: {a} vs {numeric}");
                }
            }
            checked_pairs += 1;
        }
    }

    #[test]
    fn memorizes_a_single_sample() {
        let mut model = MlpModel::init(&[4, 8, 1], 3).unwrap();
        let data = vec![(vec![0.2, 0.4, 0.6, 0.8], 37.5)];
        let cfg = TrainConfig {
            epochs: 2000,
            learning_rate: 1e-2,
            batch_size: 1,
            momentum: 0.9,
            seed: 3,
        };
        let trace = train(&mut model, &data, &cfg).unwrap();
        assert!(trace.last().unwrap() < &1e-4, "final mse {}", trace.last().unwrap());
    }

    #[test]
    fn constant_target_converges_to_the_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let data: Vec<(Vec<f64>, f64)> = (0..20)
            .map(|_| {
                let x: Vec<f64> = (0..5).map(|_| rng.random_range(0.0..1.0)).collect();
                (x, 42.0)
            })
            .collect();
        let mut model = MlpModel::init(&[5, 16, 8, 1], 9).unwrap();
        let cfg = TrainConfig {
            epochs: 800,
            learning_rate: 5e-3,
            batch_size: 4,
            momentum: 0.9,
            seed: 9,
        };
        train(&mut model, &data, &cfg).unwrap();
        for (x, _) in &data {
            let pred = model.forward(x).unwrap().output();
            assert!((pred - 42.0).abs() < 1e-3, "prediction {pred}");
        }
    }

    #[test]
    fn same_seed_twice_is_bitwise_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let data: Vec<(Vec<f64>, f64)> = (0..30)
            .map(|_| {
                let x: Vec<f64> = (0..6).map(|_| rng.random_range(0.0..1.0)).collect();
                let y = 10.0 + 50.0 * x[0] + 20.0 * x[3];
                (x, y)
            })
            .collect();
        let cfg = TrainConfig {
            epochs: 50,
            ..TrainConfig::default()
        };
        let mut m1 = MlpModel::init(&[6, 16, 1], cfg.seed).unwrap();
        let mut m2 = MlpModel::init(&[6, 16, 1], cfg.seed).unwrap();
        let t1 = train(&mut m1, &data, &cfg).unwrap();
        let t2 = train(&mut m2, &data, &cfg).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(t1, t2);
    }

    #[test]
    fn divergence_aborts_with_epoch_and_rate() {
        let data = vec![(vec![1.0, 1.0], 100.0), (vec![0.9, 0.8], 90.0)];
        let mut model = MlpModel::init(&[2, 8, 1], 1).unwrap();
        let cfg = TrainConfig {
            epochs: 200,
            learning_rate: 1e6,
            batch_size: 2,
            momentum: 0.9,
            seed: 1,
        };
        let err = train(&mut model, &data, &cfg).unwrap_err();
        match err {
            Error::Diverged { learning_rate, .. } => assert_eq!(learning_rate, 1e6),
            other => panic!("expected divergence, got {other}"),
        }
    }

    #[test]
    fn metrics_basics() {
        assert_eq!(mae(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mae(&[0.0, 10.0], &[10.0, 0.0]).unwrap(), 10.0);
        assert_eq!(rmse(&[0.0, 10.0], &[10.0, 0.0]).unwrap(), 10.0);
        assert_eq!(mae(&[50.89], &[50.89]).unwrap(), 0.0);
        assert!(mae(&[], &[]).is_err());
        assert!(mae(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn prediction_clamps_only_at_reporting() {
        assert_eq!(Prediction::from_raw(104.2).value, 100.0);
        assert_eq!(Prediction::from_raw(-3.0).value, 0.0);
        assert_eq!(Prediction::from_raw(55.5).value, 55.5);
    }

    #[test]
    fn model_persistence_round_trip_is_exact() {
        let model = MlpModel::init(&[7, 12, 5, 1], 77).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        model.save(f.path(), Some(&TrainConfig::default())).unwrap();
        let loaded = MlpModel::load(f.path()).unwrap();
        assert_eq!(model, loaded);
    }
}
