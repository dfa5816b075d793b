use rayon::prelude::*;
use thiserror::Error;

use super::cv::{repeated_stratified_kfold, CvConfig, CvError, Split};
use super::metrics::{compute_metrics, MetricsError};
use super::report::{EvaluationReport, FoldScore, ReportConfig};
use crate::balance::{smote_balance, BalanceError, SmoteConfig};
use crate::dataset::Dataset;
use crate::features::{embed_dataset, EmbeddingMatrix, DEFAULT_DIM};
use crate::grammar::Label;
use crate::models::{self, ModelConfig, ModelError, ModelKind};
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq)]
pub enum EmbedSource {
    /// Hashed character n-grams of `line + " " + comment`.
    Hashed { dim: usize },
    /// Rows aligned with the dataset records.
    Precomputed(EmbeddingMatrix),
}

impl Default for EmbedSource {
    fn default() -> Self {
        EmbedSource::Hashed { dim: DEFAULT_DIM }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BalanceMode {
    /// SMOTE applied to each training fold only.
    #[default]
    InFold,
    /// SMOTE applied once to the whole dataset before splitting. Synthetic
    /// rows derived from test samples can then appear in training folds, so
    /// scores are optimistic.
    Global,
}

impl BalanceMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BalanceMode::InFold => "in-fold",
            BalanceMode::Global => "global",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub config: ModelConfig,
}

impl ModelSpec {
    pub fn default_for(kind: ModelKind) -> Self {
        Self {
            name: kind.short_name().to_string(),
            config: ModelConfig::default_for(kind),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub cv: CvConfig,
    pub smote: SmoteConfig,
    pub balance: BalanceMode,
    pub embedding: EmbedSource,
    pub models: Vec<ModelSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            cv: CvConfig::default(),
            smote: SmoteConfig::default(),
            balance: BalanceMode::InFold,
            embedding: EmbedSource::default(),
            models: [ModelKind::RandomForest, ModelKind::Voting, ModelKind::NeuralNet]
                .into_iter()
                .map(ModelSpec::default_for)
                .collect(),
        }
    }
}

impl ExperimentConfig {
    /// Every model seed and the SMOTE seed derived from one value.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.cv.seed = seed;
        self.smote.seed = derive_seed(seed, &[1]);
        for (i, m) in self.models.iter_mut().enumerate() {
            m.config = m.config.with_seed(derive_seed(seed, &[2, i as u64]));
        }
        self
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("no models configured")]
    NoModels,
    #[error("embedding matrix has {found} rows for {expected} records")]
    EmbeddingRows { expected: usize, found: usize },
    #[error(transparent)]
    Cv(#[from] CvError),
    #[error("balancing the dataset: {0}")]
    Balance(#[from] BalanceError),
    #[error("repeat {repeat}, fold {fold}: {source}")]
    Fold {
        repeat: usize,
        fold: usize,
        #[source]
        source: FoldError,
    },
}

#[derive(Debug, Error)]
pub enum FoldError {
    #[error("SMOTE: {0}")]
    Balance(#[from] BalanceError),
    #[error("model {model}: {source}")]
    Model {
        model: String,
        #[source]
        source: ModelError,
    },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("synthetic row built from a sample outside the training fold")]
    Leakage,
}

/// Embeds (or adopts) features, runs repeated stratified k-fold and scores
/// every model on every fold.
///
/// Fold seeds derive from `(seed, repeat, fold)`, so results are identical
/// regardless of thread count.
pub fn run_experiment(dataset: &Dataset, cfg: &ExperimentConfig) -> Result<EvaluationReport, ExperimentError> {
    if dataset.is_empty() {
        return Err(ExperimentError::EmptyDataset);
    }
    if cfg.models.is_empty() {
        return Err(ExperimentError::NoModels);
    }
    let (x, embedding) = match &cfg.embedding {
        EmbedSource::Hashed { dim } => (embed_dataset(dataset, *dim), format!("hashed({dim})")),
        EmbedSource::Precomputed(m) => {
            if m.rows() != dataset.len() {
                return Err(ExperimentError::EmbeddingRows {
                    expected: dataset.len(),
                    found: m.rows(),
                });
            }
            (m.clone(), format!("precomputed({})", m.dim()))
        }
    };
    let y = dataset.labels();
    let stats = dataset.stats();

    let (x, y) = match cfg.balance {
        BalanceMode::InFold => (x, y),
        BalanceMode::Global => {
            let b = smote_balance(&x, &y, &cfg.smote)?;
            (b.features, b.labels)
        }
    };
    let splits = repeated_stratified_kfold(&y, &cfg.cv)?;
    log::info!(
        "running {} splits x {} models on {} rows ({})",
        splits.len(),
        cfg.models.len(),
        y.len(),
        cfg.balance.as_str()
    );

    let per_split: Vec<Vec<FoldScore>> = splits
        .par_iter()
        .map(|s| {
            run_fold(&x, &y, s, cfg).map_err(|source| ExperimentError::Fold {
                repeat: s.repeat,
                fold: s.fold,
                source,
            })
        })
        .collect::<Result<_, _>>()?;

    let config = ReportConfig {
        dataset: dataset.provenance().to_string(),
        samples: stats.total,
        useful: stats.useful,
        not_useful: stats.not_useful,
        folds: cfg.cv.folds,
        repeats: cfg.cv.repeats,
        cv_seed: cfg.cv.seed,
        balance: cfg.balance.as_str().to_string(),
        smote_k: cfg.smote.k_neighbors,
        smote_seed: cfg.smote.seed,
        embedding,
        models: cfg.models.iter().map(|m| (m.name.clone(), m.config.clone())).collect(),
    };
    Ok(EvaluationReport::from_folds(config, per_split.into_iter().flatten().collect()))
}

fn run_fold(x: &EmbeddingMatrix, y: &[Label], split: &Split, cfg: &ExperimentConfig) -> Result<Vec<FoldScore>, FoldError> {
    let fold_path = [split.repeat as u64, split.fold as u64];
    let x_train = x.select(&split.train);
    let y_train: Vec<Label> = split.train.iter().map(|&i| y[i]).collect();
    let x_test = x.select(&split.test);
    let y_test: Vec<Label> = split.test.iter().map(|&i| y[i]).collect();

    let (x_fit, y_fit, synthetic) = match cfg.balance {
        BalanceMode::Global => (x_train, y_train, 0),
        BalanceMode::InFold => {
            let smote = SmoteConfig {
                seed: derive_seed(cfg.smote.seed, &fold_path),
                ..cfg.smote.clone()
            };
            let b = smote_balance(&x_train, &y_train, &smote)?;
            // Origins index the fold-local training matrix, so anything out
            // of range would mean a test row leaked in.
            let n = split.train.len();
            if b.origins.iter().any(|o| o.base >= n || o.neighbor >= n) {
                return Err(FoldError::Leakage);
            }
            let synthetic = b.origins.len();
            (b.features, b.labels, synthetic)
        }
    };

    cfg.models
        .iter()
        .map(|spec| {
            let seeded = spec.config.with_seed(derive_seed(spec.config.seed(), &fold_path));
            let wrap = |source| FoldError::Model {
                model: spec.name.clone(),
                source,
            };
            let model = models::train(&seeded, &x_fit, &y_fit).map_err(wrap)?;
            let pred = model.predict(&x_test).map_err(wrap)?;
            Ok(FoldScore {
                model: spec.name.clone(),
                repeat: split.repeat,
                fold: split.fold,
                train_rows: split.train.len(),
                synthetic_rows: synthetic,
                test_rows: split.test.len(),
                metrics: compute_metrics(&y_test, &pred)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{gen_dataset, GeneratorConfig};
    use crate::models::RandomForestConfig;

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig {
            cv: CvConfig {
                folds: 3,
                repeats: 1,
                seed: 5,
            },
            embedding: EmbedSource::Hashed { dim: 64 },
            models: vec![ModelSpec {
                name: "RF".into(),
                config: ModelConfig::RandomForest(RandomForestConfig {
                    n_trees: 10,
                    ..Default::default()
                }),
            }],
            ..Default::default()
        }
    }

    fn data(n: usize) -> Dataset {
        gen_dataset(&GeneratorConfig {
            seed: 11,
            count: n,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn deterministic_and_complete() {
        let d = data(60);
        let cfg = small_cfg();
        let a = run_experiment(&d, &cfg).unwrap();
        let b = run_experiment(&d, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.folds.len(), 3);
        assert_eq!(a.summaries.len(), 1);
        assert!(a.folds.iter().all(|f| f.test_rows == 20 && f.train_rows == 40));
    }

    #[test]
    fn in_fold_smote_fills_the_minority() {
        let d = data(60).with_label_noise(0.2, 3);
        let r = run_experiment(&d, &small_cfg()).unwrap();
        let s = d.stats();
        if s.useful != s.not_useful {
            assert!(r.folds.iter().any(|f| f.synthetic_rows > 0));
        }
    }

    #[test]
    fn rejects_misaligned_embeddings() {
        let d = data(30);
        let cfg = ExperimentConfig {
            embedding: EmbedSource::Precomputed(EmbeddingMatrix::from_rows([[0.0; 4]; 5], 4)),
            ..small_cfg()
        };
        assert!(matches!(
            run_experiment(&d, &cfg),
            Err(ExperimentError::EmbeddingRows { expected: 30, found: 5 })
        ));
    }

    #[test]
    fn fold_errors_carry_position() {
        // 3 samples per class per training fold is too few for k = 5.
        let d = data(12).with_label_noise(0.25, 1);
        let err = run_experiment(&d, &small_cfg()).unwrap_err();
        assert!(matches!(err, ExperimentError::Fold { .. } | ExperimentError::Cv(_)), "{err}");
    }
}
