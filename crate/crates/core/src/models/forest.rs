use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{Columns, DecisionTree, TreeParams};
use super::{check_training, ModelError};
use crate::features::EmbeddingMatrix;
use crate::grammar::Label;
use crate::rng::{self, derive_seed};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FeatureSubset {
    /// `ceil(sqrt(dim))`
    Sqrt,
    All,
    Count(usize),
}

impl FeatureSubset {
    pub fn resolve(self, dim: usize) -> usize {
        match self {
            FeatureSubset::Sqrt => (dim as f64).sqrt().ceil() as usize,
            FeatureSubset::All => dim,
            FeatureSubset::Count(k) => k.min(dim),
        }
        .max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub features_per_split: FeatureSubset,
    pub seed: u64,
}

impl Default for RandomForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            features_per_split: FeatureSubset::Sqrt,
            seed: 0,
        }
    }
}

impl RandomForestConfig {
    fn validate(&self) -> Result<(), ModelError> {
        if self.n_trees == 0 {
            return Err(ModelError::InvalidConfig("n_trees must be at least 1".into()));
        }
        if self.max_depth == Some(0) {
            return Err(ModelError::InvalidConfig("max_depth must be at least 1".into()));
        }
        if self.min_samples_split == 0 {
            return Err(ModelError::InvalidConfig("min_samples_split must be at least 1".into()));
        }
        if self.features_per_split == FeatureSubset::Count(0) {
            return Err(ModelError::InvalidConfig("features_per_split must be at least 1".into()));
        }
        Ok(())
    }
}

/// Bagged Gini trees. Tree `t` uses its own stream seeded from
/// `(seed, t)`, so parallel and serial fits agree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
}

impl RandomForest {
    pub fn from_trees(trees: Vec<DecisionTree>) -> Self {
        assert!(!trees.is_empty(), "a forest needs at least one tree");
        Self { trees }
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn fit(cfg: &RandomForestConfig, x: &EmbeddingMatrix, y: &[Label]) -> Result<Self, ModelError> {
        cfg.validate()?;
        let classes = check_training(x, y)?;
        let params = TreeParams {
            max_depth: cfg.max_depth,
            min_samples_split: cfg.min_samples_split,
            features_per_split: cfg.features_per_split.resolve(x.dim()),
        };
        let cols = Columns::new(x);
        let n = x.rows();
        let trees = (0..cfg.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = rng::seeded(derive_seed(cfg.seed, &[t as u64]));
                let bootstrap: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                DecisionTree::fit_columns(&cols, &classes, &bootstrap, &params, &mut rng)
            })
            .collect();
        Ok(Self { trees })
    }

    /// Fraction of trees voting Useful.
    pub fn predict_proba(&self, x: &EmbeddingMatrix) -> Vec<f64> {
        x.iter()
            .map(|row| {
                let votes = self.trees.iter().filter(|t| t.vote(row) == Label::Useful).count();
                votes as f64 / self.trees.len() as f64
            })
            .collect()
    }
}
