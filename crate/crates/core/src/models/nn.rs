//! Fully connected ReLU network with a two-way softmax output, trained by
//! mini-batch gradient descent with momentum on the mean cross-entropy.
//!
//! All parameters live in one flat vector, layer by layer: an
//! `inputs x outputs` weight block stored input-major, then the bias block.
//! Input-major storage lets the forward and backward passes skip zero
//! activations, which matters for sparse hashed features.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_training, ModelError};
use crate::features::EmbeddingMatrix;
use crate::grammar::Label;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    ReLU,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightInit {
    /// Weights uniform in `±1/sqrt(fan_in)`, biases zero.
    UniformFanIn,
    Zeros,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuralNetConfig {
    pub hidden_sizes: Vec<usize>,
    pub activation: Activation,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub init: WeightInit,
    pub seed: u64,
}

impl Default for NeuralNetConfig {
    fn default() -> Self {
        Self {
            hidden_sizes: vec![128, 64],
            activation: Activation::ReLU,
            epochs: 20,
            batch_size: 32,
            learning_rate: 0.01,
            momentum: 0.9,
            init: WeightInit::UniformFanIn,
            seed: 0,
        }
    }
}

impl NeuralNetConfig {
    fn validate(&self) -> Result<(), ModelError> {
        if self.hidden_sizes.is_empty() || self.hidden_sizes.contains(&0) {
            return Err(ModelError::InvalidConfig(
                "the network needs at least one hidden layer, each of positive width".into(),
            ));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(ModelError::InvalidConfig("learning_rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(ModelError::InvalidConfig("momentum must be in [0, 1)".into()));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(ModelError::InvalidConfig("epochs and batch_size must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    /// Layer widths including input and the 2-unit output.
    sizes: Vec<usize>,
    params: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct LayerSlot {
    inputs: usize,
    outputs: usize,
    weights: usize,
    bias: usize,
}

/// Forward/backward buffers reused across samples.
struct Workspace {
    acts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
}

fn softmax2(logits: &[f64]) -> [f64; 2] {
    let m = logits[0].max(logits[1]);
    let e0 = (logits[0] - m).exp();
    let e1 = (logits[1] - m).exp();
    let s = e0 + e1;
    [e0 / s, e1 / s]
}

fn cross_entropy(logits: &[f64], class: usize) -> f64 {
    let m = logits[0].max(logits[1]);
    let lse = m + ((logits[0] - m).exp() + (logits[1] - m).exp()).ln();
    lse - logits[class]
}

impl Mlp {
    fn layout(sizes: &[usize]) -> (Vec<LayerSlot>, usize) {
        let mut slots = Vec::with_capacity(sizes.len() - 1);
        let mut offset = 0;
        for w in sizes.windows(2) {
            let (inputs, outputs) = (w[0], w[1]);
            slots.push(LayerSlot {
                inputs,
                outputs,
                weights: offset,
                bias: offset + inputs * outputs,
            });
            offset += inputs * outputs + outputs;
        }
        (slots, offset)
    }

    fn slots(&self) -> Vec<LayerSlot> {
        Self::layout(&self.sizes).0
    }

    /// Untrained network initialized from `cfg.seed` and `cfg.init`.
    pub fn init(cfg: &NeuralNetConfig, dim: usize) -> Self {
        let mut sizes = vec![dim];
        sizes.extend_from_slice(&cfg.hidden_sizes);
        sizes.push(2);
        let (slots, total) = Self::layout(&sizes);
        let mut params = vec![0.0; total];
        if cfg.init == WeightInit::UniformFanIn {
            let mut rng = rng::seeded(cfg.seed);
            for s in &slots {
                let bound = 1.0 / (s.inputs as f64).sqrt();
                for w in &mut params[s.weights..s.bias] {
                    *w = rng.gen_range(-bound..=bound);
                }
            }
        }
        Self { sizes, params }
    }

    pub fn dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn parameter_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    fn workspace(&self) -> Workspace {
        let widest = *self.sizes.iter().max().unwrap();
        Workspace {
            acts: self.sizes.iter().map(|&s| vec![0.0; s]).collect(),
            delta: Vec::with_capacity(widest),
            delta_prev: Vec::with_capacity(widest),
        }
    }

    /// Leaves logits in `ws.acts.last()`.
    fn forward(&self, params: &[f64], slots: &[LayerSlot], x: &[f64], ws: &mut Workspace) {
        ws.acts[0].copy_from_slice(x);
        for (l, s) in slots.iter().enumerate() {
            let (before, after) = ws.acts.split_at_mut(l + 1);
            let input = &before[l];
            let out = &mut after[0];
            out.copy_from_slice(&params[s.bias..s.bias + s.outputs]);
            for (i, &a) in input.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let row = &params[s.weights + i * s.outputs..s.weights + (i + 1) * s.outputs];
                for (o, w) in out.iter_mut().zip(row) {
                    *o += a * w;
                }
            }
            if l + 1 < slots.len() {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
            }
        }
    }

    /// Adds this sample's gradient into `grad`; returns its loss.
    fn backward(&self, params: &[f64], slots: &[LayerSlot], class: usize, ws: &mut Workspace, grad: &mut [f64]) -> f64 {
        let logits = ws.acts.last().unwrap();
        let loss = cross_entropy(logits, class);
        let probs = softmax2(logits);
        ws.delta.clear();
        ws.delta.extend_from_slice(&probs);
        ws.delta[class] -= 1.0;
        for (l, s) in slots.iter().enumerate().rev() {
            let input = &ws.acts[l];
            for (j, d) in ws.delta.iter().enumerate() {
                grad[s.bias + j] += d;
            }
            for (i, &a) in input.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let g = &mut grad[s.weights + i * s.outputs..s.weights + (i + 1) * s.outputs];
                for (gw, d) in g.iter_mut().zip(&ws.delta) {
                    *gw += a * d;
                }
            }
            if l > 0 {
                ws.delta_prev.clear();
                for (i, &a) in input.iter().enumerate() {
                    // ReLU'(z) = 1 iff the post-activation is positive.
                    let v = if a > 0.0 {
                        let row = &params[s.weights + i * s.outputs..s.weights + (i + 1) * s.outputs];
                        row.iter().zip(&ws.delta).map(|(w, d)| w * d).sum()
                    } else {
                        0.0
                    };
                    ws.delta_prev.push(v);
                }
                std::mem::swap(&mut ws.delta, &mut ws.delta_prev);
            }
        }
        loss
    }

    fn mean_loss_with(&self, params: &[f64], x: &EmbeddingMatrix, classes: &[usize]) -> f64 {
        let slots = self.slots();
        let mut ws = self.workspace();
        let total: f64 = x
            .iter()
            .zip(classes)
            .map(|(row, &c)| {
                self.forward(params, &slots, row, &mut ws);
                cross_entropy(ws.acts.last().unwrap(), c)
            })
            .sum();
        total / x.rows() as f64
    }

    /// Mean cross-entropy on `(x, y)`.
    pub fn loss(&self, x: &EmbeddingMatrix, y: &[Label]) -> f64 {
        let classes: Vec<usize> = y.iter().map(|l| l.class_index()).collect();
        self.mean_loss_with(&self.params, x, &classes)
    }

    /// Mean gradient of the loss over all rows, in parameter order.
    pub fn gradient(&self, x: &EmbeddingMatrix, y: &[Label]) -> Vec<f64> {
        let slots = self.slots();
        let mut ws = self.workspace();
        let mut grad = vec![0.0; self.params.len()];
        for (row, label) in x.iter().zip(y) {
            self.forward(&self.params, &slots, row, &mut ws);
            self.backward(&self.params, &slots, label.class_index(), &mut ws, &mut grad);
        }
        let n = x.rows() as f64;
        grad.iter_mut().for_each(|g| *g /= n);
        grad
    }

    pub fn fit(cfg: &NeuralNetConfig, x: &EmbeddingMatrix, y: &[Label]) -> Result<Self, ModelError> {
        Self::fit_with_history(cfg, x, y, false).map(|(m, _)| m)
    }

    /// Like [`Mlp::fit`]; with `track_loss` also returns the full-data loss
    /// after each epoch.
    pub fn fit_with_history(
        cfg: &NeuralNetConfig,
        x: &EmbeddingMatrix,
        y: &[Label],
        track_loss: bool,
    ) -> Result<(Self, Vec<f64>), ModelError> {
        cfg.validate()?;
        let classes: Vec<usize> = check_training(x, y)?.into_iter().map(usize::from).collect();
        let mut model = Self::init(cfg, x.dim());
        let mut rng = rng::seeded(rng::derive_seed(cfg.seed, &[1]));
        let slots = model.slots();
        let mut ws = model.workspace();
        let mut grad = vec![0.0; model.params.len()];
        let mut velocity = vec![0.0; model.params.len()];
        let mut order: Vec<usize> = (0..x.rows()).collect();
        let mut history = Vec::new();

        for _ in 0..cfg.epochs {
            order.shuffle(&mut rng);
            for batch in order.chunks(cfg.batch_size) {
                grad.iter_mut().for_each(|g| *g = 0.0);
                for &i in batch {
                    model.forward(&model.params, &slots, x.row(i), &mut ws);
                    model.backward(&model.params, &slots, classes[i], &mut ws, &mut grad);
                }
                let step = cfg.learning_rate / batch.len() as f64;
                for ((p, v), g) in model.params.iter_mut().zip(&mut velocity).zip(&grad) {
                    *v = cfg.momentum * *v - step * g;
                    *p += *v;
                }
            }
            if track_loss {
                history.push(model.mean_loss_with(&model.params, x, &classes));
            }
        }
        Ok((model, history))
    }

    /// Softmax output `[p(NotUseful), p(Useful)]` per row.
    pub fn predict_distribution(&self, x: &EmbeddingMatrix) -> Vec<[f64; 2]> {
        let slots = self.slots();
        let mut ws = self.workspace();
        x.iter()
            .map(|row| {
                self.forward(&self.params, &slots, row, &mut ws);
                softmax2(ws.acts.last().unwrap())
            })
            .collect()
    }

    pub fn predict_proba(&self, x: &EmbeddingMatrix) -> Vec<f64> {
        self.predict_distribution(x).into_iter().map(|p| p[1]).collect()
    }
}

/// Largest relative error between the backpropagated gradient and central
/// finite differences (step 1e-5) over every parameter of a freshly
/// initialized network. Meant for small networks and a handful of rows.
pub fn gradient_check(cfg: &NeuralNetConfig, x: &EmbeddingMatrix, y: &[Label]) -> f64 {
    gradient_check_with(cfg, x, y, |_| {})
}

/// [`gradient_check`] with a hook that may alter the analytic gradient
/// before comparison, for mutation testing of the harness itself.
///
/// Relative error is `|a - n| / max(|a|, |n|, 1e-6)`; the floor keeps
/// parameters with near-zero gradient from reporting finite-difference
/// round-off as error.
pub fn gradient_check_with(
    cfg: &NeuralNetConfig,
    x: &EmbeddingMatrix,
    y: &[Label],
    tamper: impl FnOnce(&mut [f64]),
) -> f64 {
    const STEP: f64 = 1e-5;
    assert_eq!(x.rows(), y.len(), "gradient check needs one label per row");
    assert!(!y.is_empty(), "gradient check needs at least one row");
    let net = Mlp::init(cfg, x.dim());
    let classes: Vec<usize> = y.iter().map(|l| l.class_index()).collect();
    let mut analytic = net.gradient(x, y);
    tamper(&mut analytic);

    let mut params = net.params.clone();
    let mut worst: f64 = 0.0;
    for (k, a) in analytic.iter().enumerate() {
        let original = params[k];
        params[k] = original + STEP;
        let plus = net.mean_loss_with(&params, x, &classes);
        params[k] = original - STEP;
        let minus = net.mean_loss_with(&params, x, &classes);
        params[k] = original;
        let numeric = (plus - minus) / (2.0 * STEP);
        let denom = a.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((a - numeric).abs() / denom);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize, dim: usize, seed: u64) -> (EmbeddingMatrix, Vec<Label>) {
        let mut r = rng::seeded(seed);
        let mut x = EmbeddingMatrix::new(dim);
        let mut y = Vec::new();
        for _ in 0..n {
            let row: Vec<f64> = (0..dim).map(|_| r.gen_range(-1.0..1.0)).collect();
            y.push(if row[0] + row[1] > 0.0 { Label::Useful } else { Label::NotUseful });
            x.push_row(&row);
        }
        (x, y)
    }

    fn small() -> NeuralNetConfig {
        NeuralNetConfig {
            hidden_sizes: vec![16],
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn backprop_matches_finite_differences() {
        let (x, y) = toy(20, 5, 1);
        let err = gradient_check(&small(), &x, &y);
        assert!(err <= 1e-4, "{err}");
        let deep = NeuralNetConfig {
            hidden_sizes: vec![8, 6],
            ..small()
        };
        let err = gradient_check(&deep, &x, &y);
        assert!(err <= 1e-4, "{err}");
    }

    #[test]
    fn mutated_gradient_is_caught() {
        let (x, y) = toy(20, 5, 2);
        let err = gradient_check_with(&small(), &x, &y, |g| g.iter_mut().for_each(|v| *v *= 1.1));
        assert!(err > 1e-2, "{err}");
        let err = gradient_check_with(&small(), &x, &y, |g| g[0] += 0.05);
        assert!(err > 1e-2, "{err}");
    }

    #[test]
    fn zero_init_check_is_finite() {
        let x = EmbeddingMatrix::from_rows([[1.0, -1.0], [-1.0, 1.0]], 2);
        let y = [Label::Useful, Label::NotUseful];
        let cfg = NeuralNetConfig {
            init: WeightInit::Zeros,
            ..small()
        };
        let err = gradient_check(&cfg, &x, &y);
        assert!(err.is_finite());
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let (x, y) = toy(50, 4, 3);
        let m = Mlp::fit(&small(), &x, &y).unwrap();
        for p in m.predict_distribution(&x) {
            assert!((p[0] + p[1] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn loss_descends_at_small_learning_rate() {
        let (x, y) = toy(100, 4, 4);
        let cfg = NeuralNetConfig {
            learning_rate: 1e-3,
            epochs: 30,
            ..small()
        };
        let (_, history) = Mlp::fit_with_history(&cfg, &x, &y, true).unwrap();
        assert_eq!(history.len(), 30);
        for w in history.windows(2) {
            assert!(w[1] <= w[0], "{history:?}");
        }
    }

    #[test]
    fn layout_counts_parameters() {
        let m = Mlp::init(&small(), 5);
        assert_eq!(m.layer_sizes(), &[5, 16, 2]);
        assert_eq!(m.parameter_count(), 5 * 16 + 16 + 16 * 2 + 2);
    }

    #[test]
    fn invalid_configs() {
        let (x, y) = toy(10, 2, 5);
        for cfg in [
            NeuralNetConfig { hidden_sizes: vec![], ..small() },
            NeuralNetConfig { learning_rate: 0.0, ..small() },
            NeuralNetConfig { batch_size: 0, ..small() },
        ] {
            assert!(matches!(Mlp::fit(&cfg, &x, &y), Err(ModelError::InvalidConfig(_))));
        }
    }
}
