use serde::{Deserialize, Serialize};

use super::{check_training, ModelError};
use crate::features::EmbeddingMatrix;
use crate::grammar::Label;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnConfig {
    pub k: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        Self { k: 5 }
    }
}

/// Euclidean k-nearest-neighbours; probability is the Useful share among the
/// `k` closest training rows, ties in distance going to the earlier row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    k: usize,
    dim: usize,
    points: Vec<f64>,
    classes: Vec<u8>,
}

impl Knn {
    pub fn fit(cfg: &KnnConfig, x: &EmbeddingMatrix, y: &[Label]) -> Result<Self, ModelError> {
        if cfg.k == 0 {
            return Err(ModelError::InvalidConfig("k must be at least 1".into()));
        }
        let classes = check_training(x, y)?;
        Ok(Self {
            k: cfg.k.min(x.rows()),
            dim: x.dim(),
            points: x.as_flat().to_vec(),
            classes,
        })
    }

    pub fn predict_proba(&self, x: &EmbeddingMatrix) -> Vec<f64> {
        let mut dists: Vec<(f64, usize)> = Vec::with_capacity(self.classes.len());
        x.iter()
            .map(|q| {
                dists.clear();
                dists.extend(self.points.chunks_exact(self.dim).enumerate().map(|(j, p)| {
                    let d: f64 = q.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
                    (d, j)
                }));
                let by = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
                if self.k < dists.len() {
                    dists.select_nth_unstable_by(self.k - 1, by);
                }
                let useful = dists[..self.k].iter().filter(|(_, j)| self.classes[*j] == 1).count();
                useful as f64 / self.k as f64
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbours_vote() {
        let x = EmbeddingMatrix::from_rows([[0.0], [0.1], [0.2], [5.0], [5.1]], 1);
        let y = [Label::Useful, Label::Useful, Label::NotUseful, Label::NotUseful, Label::NotUseful];
        let m = Knn::fit(&KnnConfig { k: 3 }, &x, &y).unwrap();
        let p = m.predict_proba(&EmbeddingMatrix::from_rows([[0.05], [5.05]], 1));
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((p[1] - 0.0).abs() < 1e-12);
    }

    #[test]
    fn distance_ties_go_to_earlier_rows() {
        let x = EmbeddingMatrix::from_rows([[1.0], [-1.0], [1.0]], 1);
        let y = [Label::Useful, Label::NotUseful, Label::NotUseful];
        let m = Knn::fit(&KnnConfig { k: 1 }, &x, &y).unwrap();
        assert_eq!(m.predict_proba(&EmbeddingMatrix::from_rows([[0.0]], 1)), vec![1.0]);
    }
}
