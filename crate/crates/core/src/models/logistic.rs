use serde::{Deserialize, Serialize};

use super::{check_training, ModelError};
use crate::features::EmbeddingMatrix;
use crate::grammar::Label;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub l2: f64,
    pub max_epochs: usize,
    /// Stop once the loss improves by less than this between epochs.
    pub tolerance: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1.0,
            l2: 1e-4,
            max_epochs: 500,
            tolerance: 1e-7,
        }
    }
}

/// Binary logistic regression fitted by full-batch gradient descent on the
/// L2-penalized mean log loss. Training is deterministic and uses no RNG.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegression {
    weights: Vec<f64>,
    bias: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn log_loss(p: f64, y: f64) -> f64 {
    let p = p.clamp(1e-15, 1.0 - 1e-15);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

impl LogisticRegression {
    pub fn fit(cfg: &LogisticConfig, x: &EmbeddingMatrix, y: &[Label]) -> Result<Self, ModelError> {
        if !(cfg.learning_rate.is_finite() && cfg.learning_rate > 0.0) || cfg.l2 < 0.0 || cfg.max_epochs == 0 {
            return Err(ModelError::InvalidConfig(
                "logistic regression needs learning_rate > 0, l2 >= 0 and max_epochs >= 1".into(),
            ));
        }
        let classes = check_training(x, y)?;
        let (n, dim) = (x.rows() as f64, x.dim());
        let mut model = Self {
            weights: vec![0.0; dim],
            bias: 0.0,
        };
        let mut grad = vec![0.0; dim];
        let mut previous = f64::INFINITY;
        for _ in 0..cfg.max_epochs {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut grad_bias = 0.0;
            let mut loss = 0.0;
            for (row, &c) in x.iter().zip(&classes) {
                let p = sigmoid(model.logit(row));
                let target = c as f64;
                loss += log_loss(p, target);
                let err = p - target;
                grad_bias += err;
                for (g, v) in grad.iter_mut().zip(row) {
                    if *v != 0.0 {
                        *g += err * v;
                    }
                }
            }
            let penalty: f64 = model.weights.iter().map(|w| w * w).sum::<f64>() * cfg.l2 / 2.0;
            let loss = loss / n + penalty;
            for (w, g) in model.weights.iter_mut().zip(&grad) {
                *w -= cfg.learning_rate * (g / n + cfg.l2 * *w);
            }
            model.bias -= cfg.learning_rate * grad_bias / n;
            if (previous - loss).abs() < cfg.tolerance {
                break;
            }
            previous = loss;
        }
        Ok(model)
    }

    fn logit(&self, row: &[f64]) -> f64 {
        self.bias + row.iter().zip(&self.weights).map(|(v, w)| v * w).sum::<f64>()
    }

    pub fn predict_proba(&self, x: &EmbeddingMatrix) -> Vec<f64> {
        x.iter().map(|row| sigmoid(self.logit(row))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separates_a_line() {
        let x = EmbeddingMatrix::from_rows((0..40).map(|i| [i as f64 / 40.0 - 0.5]), 1);
        let y: Vec<Label> = (0..40).map(|i| if i >= 20 { Label::Useful } else { Label::NotUseful }).collect();
        let m = LogisticRegression::fit(&LogisticConfig::default(), &x, &y).unwrap();
        let p = m.predict_proba(&x);
        assert!(p[0] < 0.5 && p[39] > 0.5);
        let correct = p.iter().zip(&y).filter(|(p, l)| (**p >= 0.5) == (**l == Label::Useful)).count();
        assert!(correct >= 38);
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
        assert!(sigmoid(-800.0).is_finite());
    }
}
