//! Classifiers: random forest, voting ensemble and a multilayer perceptron,
//! plus the logistic-regression and k-NN members the ensemble uses.
//!
//! Classes are encoded Useful = 1, NotUseful = 0. Every model reports a
//! probability of Useful per row and predicts Useful when it is at least 0.5.

mod forest;
mod knn;
mod logistic;
mod nn;
mod tree;
mod voting;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::EmbeddingMatrix;
use crate::grammar::Label;
use crate::rng::derive_seed;

pub use forest::{FeatureSubset, RandomForest, RandomForestConfig};
pub use knn::{Knn, KnnConfig};
pub use logistic::{LogisticConfig, LogisticRegression};
pub use nn::{gradient_check, gradient_check_with, Mlp, NeuralNetConfig, WeightInit};
pub use tree::{DecisionTree, TreeParams};
pub use voting::{combine_votes, MemberConfig, MemberModel, Voting, VotingConfig, VotingMode};

pub const MODEL_FORMAT: &str = "commentlab-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("feature dimension mismatch: model expects {expected}, input has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{rows} feature rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("training data has a single class ({0}); both classes are required")]
    SingleClass(Label),
    #[error("training needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("model file: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file is not a valid {MODEL_FORMAT} document: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "RF")]
    RandomForest,
    #[serde(rename = "VC")]
    Voting,
    #[serde(rename = "NN")]
    NeuralNet,
}

impl ModelKind {
    pub fn short_name(self) -> &'static str {
        match self {
            ModelKind::RandomForest => "RF",
            ModelKind::Voting => "VC",
            ModelKind::NeuralNet => "NN",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rf" => Ok(ModelKind::RandomForest),
            "vc" => Ok(ModelKind::Voting),
            "nn" => Ok(ModelKind::NeuralNet),
            other => Err(format!("unknown model `{other}` (expected rf, vc or nn)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelConfig {
    RandomForest(RandomForestConfig),
    Voting(VotingConfig),
    NeuralNet(NeuralNetConfig),
}

impl ModelConfig {
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::RandomForest => ModelConfig::RandomForest(RandomForestConfig::default()),
            ModelKind::Voting => ModelConfig::Voting(VotingConfig::default()),
            ModelKind::NeuralNet => ModelConfig::NeuralNet(NeuralNetConfig::default()),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelConfig::RandomForest(_) => ModelKind::RandomForest,
            ModelConfig::Voting(_) => ModelKind::Voting,
            ModelConfig::NeuralNet(_) => ModelKind::NeuralNet,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            ModelConfig::RandomForest(c) => c.seed,
            ModelConfig::Voting(c) => c.seed,
            ModelConfig::NeuralNet(c) => c.seed,
        }
    }

    /// Copy with `seed` as the model seed. Voting members get seeds derived
    /// from it by position.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut out = self.clone();
        match &mut out {
            ModelConfig::RandomForest(c) => c.seed = seed,
            ModelConfig::NeuralNet(c) => c.seed = seed,
            ModelConfig::Voting(c) => {
                c.seed = seed;
                for (i, m) in c.members.iter_mut().enumerate() {
                    m.set_seed(derive_seed(seed, &[i as u64]));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
enum ModelState {
    RandomForest(RandomForest),
    Voting(Voting),
    NeuralNet(Mlp),
}

/// A fitted, immutable classifier.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainedModel {
    config: ModelConfig,
    dim: usize,
    state: ModelState,
}

/// Checks shared training preconditions and returns the class encoding.
pub(crate) fn check_training(x: &EmbeddingMatrix, y: &[Label]) -> Result<Vec<u8>, ModelError> {
    if x.rows() != y.len() {
        return Err(ModelError::LengthMismatch {
            rows: x.rows(),
            labels: y.len(),
        });
    }
    if y.len() < 2 {
        return Err(ModelError::TooFewSamples(y.len()));
    }
    let first = y[0];
    if y.iter().all(|l| *l == first) {
        return Err(ModelError::SingleClass(first));
    }
    Ok(y.iter().map(|l| l.class_index() as u8).collect())
}

pub(crate) fn check_dim(expected: usize, x: &EmbeddingMatrix) -> Result<(), ModelError> {
    if x.dim() != expected {
        return Err(ModelError::DimensionMismatch {
            expected,
            found: x.dim(),
        });
    }
    Ok(())
}

pub(crate) fn to_labels(proba: &[f64]) -> Vec<Label> {
    proba
        .iter()
        .map(|&p| if p >= 0.5 { Label::Useful } else { Label::NotUseful })
        .collect()
}

pub fn train(config: &ModelConfig, x: &EmbeddingMatrix, y: &[Label]) -> Result<TrainedModel, ModelError> {
    let state = match config {
        ModelConfig::RandomForest(c) => ModelState::RandomForest(RandomForest::fit(c, x, y)?),
        ModelConfig::Voting(c) => ModelState::Voting(Voting::fit(c, x, y)?),
        ModelConfig::NeuralNet(c) => ModelState::NeuralNet(Mlp::fit(c, x, y)?),
    };
    Ok(TrainedModel {
        config: config.clone(),
        dim: x.dim(),
        state,
    })
}

#[derive(Serialize, Deserialize)]
struct SavedModel {
    format: String,
    version: u32,
    kind: ModelKind,
    dim: usize,
    seed: u64,
    model: TrainedModel,
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        self.config.kind()
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Probability of Useful per row.
    pub fn predict_proba(&self, x: &EmbeddingMatrix) -> Result<Vec<f64>, ModelError> {
        check_dim(self.dim, x)?;
        Ok(match &self.state {
            ModelState::RandomForest(m) => m.predict_proba(x),
            ModelState::Voting(m) => m.predict_proba(x),
            ModelState::NeuralNet(m) => m.predict_proba(x),
        })
    }

    pub fn predict(&self, x: &EmbeddingMatrix) -> Result<Vec<Label>, ModelError> {
        Ok(to_labels(&self.predict_proba(x)?))
    }

    pub fn as_forest(&self) -> Option<&RandomForest> {
        match &self.state {
            ModelState::RandomForest(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_mlp(&self) -> Option<&Mlp> {
        match &self.state {
            ModelState::NeuralNet(m) => Some(m),
            _ => None,
        }
    }

    /// Self-describing JSON document with kind, dimension, seed and the full
    /// configuration alongside the learned parameters.
    pub fn to_json(&self) -> String {
        let saved = SavedModel {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_FORMAT_VERSION,
            kind: self.kind(),
            dim: self.dim,
            seed: self.config.seed(),
            model: self.clone(),
        };
        serde_json::to_string(&saved).expect("model parameters are finite")
    }

    pub fn from_json(s: &str) -> Result<TrainedModel, ModelError> {
        let saved: SavedModel = serde_json::from_str(s).map_err(|e| ModelError::Format(e.to_string()))?;
        if saved.format != MODEL_FORMAT {
            return Err(ModelError::Format(format!("unexpected format tag `{}`", saved.format)));
        }
        if saved.version != MODEL_FORMAT_VERSION {
            return Err(ModelError::Format(format!("unsupported version {}", saved.version)));
        }
        if saved.kind != saved.model.kind() || saved.dim != saved.model.dim {
            return Err(ModelError::Format("header does not match model body".into()));
        }
        Ok(saved.model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<TrainedModel, ModelError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
