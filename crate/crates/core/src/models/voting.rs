use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    check_training, Knn, KnnConfig, LogisticConfig, LogisticRegression, Mlp, ModelError, NeuralNetConfig,
    RandomForest, RandomForestConfig,
};
use crate::features::EmbeddingMatrix;
use crate::grammar::Label;
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VotingMode {
    /// Majority of member predictions; an even vote goes to Useful.
    Hard,
    /// Mean of member probabilities.
    Soft,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MemberConfig {
    RandomForest(RandomForestConfig),
    Logistic(LogisticConfig),
    Knn(KnnConfig),
    NeuralNet(NeuralNetConfig),
}

impl MemberConfig {
    pub fn seed(&self) -> u64 {
        match self {
            MemberConfig::RandomForest(c) => c.seed,
            MemberConfig::NeuralNet(c) => c.seed,
            MemberConfig::Logistic(_) | MemberConfig::Knn(_) => 0,
        }
    }

    /// Members without randomness ignore the seed.
    pub fn set_seed(&mut self, seed: u64) {
        match self {
            MemberConfig::RandomForest(c) => c.seed = seed,
            MemberConfig::NeuralNet(c) => c.seed = seed,
            MemberConfig::Logistic(_) | MemberConfig::Knn(_) => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VotingConfig {
    pub members: Vec<MemberConfig>,
    pub mode: VotingMode,
    pub seed: u64,
}

impl Default for VotingConfig {
    fn default() -> Self {
        Self {
            members: vec![
                MemberConfig::RandomForest(RandomForestConfig {
                    seed: derive_seed(0, &[0]),
                    ..Default::default()
                }),
                MemberConfig::Logistic(LogisticConfig::default()),
                MemberConfig::Knn(KnnConfig::default()),
            ],
            mode: VotingMode::Soft,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MemberModel {
    RandomForest(RandomForest),
    Logistic(LogisticRegression),
    Knn(Knn),
    NeuralNet(Mlp),
}

impl MemberModel {
    fn fit(cfg: &MemberConfig, x: &EmbeddingMatrix, y: &[Label]) -> Result<Self, ModelError> {
        Ok(match cfg {
            MemberConfig::RandomForest(c) => MemberModel::RandomForest(RandomForest::fit(c, x, y)?),
            MemberConfig::Logistic(c) => MemberModel::Logistic(LogisticRegression::fit(c, x, y)?),
            MemberConfig::Knn(c) => MemberModel::Knn(Knn::fit(c, x, y)?),
            MemberConfig::NeuralNet(c) => MemberModel::NeuralNet(Mlp::fit(c, x, y)?),
        })
    }

    pub fn predict_proba(&self, x: &EmbeddingMatrix) -> Vec<f64> {
        match self {
            MemberModel::RandomForest(m) => m.predict_proba(x),
            MemberModel::Logistic(m) => m.predict_proba(x),
            MemberModel::Knn(m) => m.predict_proba(x),
            MemberModel::NeuralNet(m) => m.predict_proba(x),
        }
    }
}

/// Combined probability of Useful for one row. In hard mode this is the
/// share of members whose own probability is at least 0.5.
pub fn combine_votes(mode: VotingMode, member_probs: &[f64]) -> f64 {
    let m = member_probs.len() as f64;
    match mode {
        VotingMode::Soft => member_probs.iter().sum::<f64>() / m,
        VotingMode::Hard => member_probs.iter().filter(|p| **p >= 0.5).count() as f64 / m,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Voting {
    mode: VotingMode,
    members: Vec<MemberModel>,
}

impl Voting {
    pub fn fit(cfg: &VotingConfig, x: &EmbeddingMatrix, y: &[Label]) -> Result<Self, ModelError> {
        if cfg.members.len() < 2 {
            return Err(ModelError::InvalidConfig("a voting ensemble needs at least 2 members".into()));
        }
        check_training(x, y)?;
        let members = cfg
            .members
            .par_iter()
            .map(|m| MemberModel::fit(m, x, y))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { mode: cfg.mode, members })
    }

    pub fn members(&self) -> &[MemberModel] {
        &self.members
    }

    pub fn predict_proba(&self, x: &EmbeddingMatrix) -> Vec<f64> {
        let per_member: Vec<Vec<f64>> = self.members.iter().map(|m| m.predict_proba(x)).collect();
        let mut row = Vec::with_capacity(self.members.len());
        (0..x.rows())
            .map(|i| {
                row.clear();
                row.extend(per_member.iter().map(|p| p[i]));
                combine_votes(self.mode, &row)
            })
            .collect()
    }
}
