//! SMOTE oversampling for two-class feature matrices.

use rand::Rng;
use thiserror::Error;

use crate::features::EmbeddingMatrix;
use crate::grammar::Label;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BalanceTarget {
    /// Grow the minority class to the majority count.
    EqualizeToMajority,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoteConfig {
    pub k_neighbors: usize,
    pub target: BalanceTarget,
    pub seed: u64,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        Self {
            k_neighbors: 5,
            target: BalanceTarget::EqualizeToMajority,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BalanceError {
    #[error("SMOTE needs both classes; only {0} is present")]
    SingleClass(Label),
    #[error("SMOTE needs a non-empty input")]
    Empty,
    #[error("{rows} feature rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("k_neighbors must be at least 1")]
    ZeroNeighbors,
    #[error("minority class has {minority} samples, which is not more than k={k}; use a smaller k_neighbors")]
    DegenerateMinority { minority: usize, k: usize },
}

/// How one synthetic row was built: `base + gap * (neighbor - base)`, with
/// `base` and `neighbor` indexing the input rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticOrigin {
    pub base: usize,
    pub neighbor: usize,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct Balanced {
    /// Input rows first, unchanged, then synthetic rows.
    pub features: EmbeddingMatrix,
    pub labels: Vec<Label>,
    pub origins: Vec<SyntheticOrigin>,
}

impl Balanced {
    pub fn original_rows(&self) -> usize {
        self.labels.len() - self.origins.len()
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// The `k` nearest points to `x.row(query)` among `pool` (excluding the
/// query itself) by Euclidean distance. Ties go to the lower row index.
pub fn k_nearest(x: &EmbeddingMatrix, query: usize, pool: &[usize], k: usize) -> Vec<usize> {
    let q = x.row(query);
    let mut dists: Vec<(f64, usize)> = pool
        .iter()
        .filter(|&&j| j != query)
        .map(|&j| (squared_distance(q, x.row(j)), j))
        .collect();
    let k = k.min(dists.len());
    let by_dist = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < dists.len() {
        dists.select_nth_unstable_by(k, by_dist);
        dists.truncate(k);
    }
    dists.sort_unstable_by(by_dist);
    dists.into_iter().map(|(_, j)| j).collect()
}

/// Oversamples the minority class until both classes have the same count.
/// Each synthetic row picks a uniformly random minority base, one of its
/// `k` nearest minority neighbours, and a gap uniform in `[0, 1)`.
pub fn smote_balance(x: &EmbeddingMatrix, y: &[Label], cfg: &SmoteConfig) -> Result<Balanced, BalanceError> {
    if x.rows() != y.len() {
        return Err(BalanceError::LengthMismatch {
            rows: x.rows(),
            labels: y.len(),
        });
    }
    if y.is_empty() {
        return Err(BalanceError::Empty);
    }
    if cfg.k_neighbors == 0 {
        return Err(BalanceError::ZeroNeighbors);
    }
    let useful: Vec<usize> = (0..y.len()).filter(|&i| y[i] == Label::Useful).collect();
    let not_useful: Vec<usize> = (0..y.len()).filter(|&i| y[i] == Label::NotUseful).collect();
    if useful.is_empty() {
        return Err(BalanceError::SingleClass(Label::NotUseful));
    }
    if not_useful.is_empty() {
        return Err(BalanceError::SingleClass(Label::Useful));
    }
    // Ties in class size leave nothing to do; the useful class counts as the
    // majority then.
    let (minority, majority_len, minority_label) = if not_useful.len() <= useful.len() {
        (not_useful, useful.len(), Label::NotUseful)
    } else {
        (useful, not_useful.len(), Label::Useful)
    };
    if minority.len() <= cfg.k_neighbors {
        return Err(BalanceError::DegenerateMinority {
            minority: minority.len(),
            k: cfg.k_neighbors,
        });
    }

    let needed = match cfg.target {
        BalanceTarget::EqualizeToMajority => majority_len - minority.len(),
    };
    let mut features = x.clone();
    let mut labels = y.to_vec();
    let mut origins = Vec::with_capacity(needed);
    let mut neighbors: Vec<Option<Vec<usize>>> = vec![None; minority.len()];
    let mut rng = rng::seeded(cfg.seed);
    let mut point = vec![0.0; x.dim()];

    for _ in 0..needed {
        let slot = rng.gen_range(0..minority.len());
        let base = minority[slot];
        let nn = neighbors[slot].get_or_insert_with(|| k_nearest(x, base, &minority, cfg.k_neighbors));
        let neighbor = nn[rng.gen_range(0..nn.len())];
        let gap: f64 = rng.gen();
        let (b, n) = (x.row(base), x.row(neighbor));
        for ((p, bv), nv) in point.iter_mut().zip(b).zip(n) {
            *p = bv + gap * (nv - bv);
        }
        features.push_row(&point);
        labels.push(minority_label);
        origins.push(SyntheticOrigin { base, neighbor, gap });
    }

    Ok(Balanced {
        features,
        labels,
        origins,
    })
}
