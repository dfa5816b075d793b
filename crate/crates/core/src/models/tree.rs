use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::features::EmbeddingMatrix;
use crate::grammar::Label;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Number of non-constant candidate features examined per split.
    pub features_per_split: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf {
        useful_fraction: f64,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

/// Column-major copy of a feature matrix; split search walks one feature at
/// a time.
pub(crate) struct Columns {
    data: Vec<f64>,
    rows: usize,
    dim: usize,
}

impl Columns {
    pub(crate) fn new(x: &EmbeddingMatrix) -> Self {
        let (rows, dim) = (x.rows(), x.dim());
        let mut data = vec![0.0; rows * dim];
        for (i, row) in x.iter().enumerate() {
            for (f, v) in row.iter().enumerate() {
                data[f * rows + i] = *v;
            }
        }
        Self { data, rows, dim }
    }

    fn column(&self, f: usize) -> &[f64] {
        &self.data[f * self.rows..(f + 1) * self.rows]
    }
}

/// Binary CART tree grown with Gini impurity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

fn gini_mass(pos: usize, n: usize) -> f64 {
    // n * G where G = 1 - p^2 - (1-p)^2 = 2p(1-p)
    if n == 0 {
        return 0.0;
    }
    2.0 * pos as f64 * (n - pos) as f64 / n as f64
}

struct Scratch {
    order: Vec<usize>,
    pairs: Vec<(f64, u8)>,
}

impl DecisionTree {
    /// Single-leaf tree, mostly useful for tests and degenerate input.
    pub fn leaf(useful_fraction: f64) -> Self {
        Self {
            nodes: vec![Node::Leaf { useful_fraction }],
        }
    }

    /// Fits on the rows listed in `samples` (duplicates allowed, as in a
    /// bootstrap draw).
    pub fn fit<R: Rng + ?Sized>(
        x: &EmbeddingMatrix,
        y: &[Label],
        samples: &[usize],
        params: &TreeParams,
        rng: &mut R,
    ) -> Self {
        let classes: Vec<u8> = y.iter().map(|l| l.class_index() as u8).collect();
        Self::fit_columns(&Columns::new(x), &classes, samples, params, rng)
    }

    pub(crate) fn fit_columns<R: Rng + ?Sized>(
        cols: &Columns,
        y: &[u8],
        samples: &[usize],
        params: &TreeParams,
        rng: &mut R,
    ) -> Self {
        let mut nodes = vec![Node::Leaf { useful_fraction: 0.0 }];
        let mut scratch = Scratch {
            order: (0..cols.dim).collect(),
            pairs: Vec::with_capacity(samples.len()),
        };
        let mut stack = vec![(0usize, samples.to_vec(), 0usize)];
        while let Some((id, idx, depth)) = stack.pop() {
            let n = idx.len();
            let pos = idx.iter().map(|&i| y[i] as usize).sum::<usize>();
            let leaf = Node::Leaf {
                useful_fraction: if n == 0 { 0.5 } else { pos as f64 / n as f64 },
            };
            let stop = pos == 0
                || pos == n
                || n < params.min_samples_split.max(2)
                || params.max_depth.is_some_and(|d| depth >= d);
            let split = if stop {
                None
            } else {
                best_split(cols, y, &idx, pos, params.features_per_split, rng, &mut scratch)
            };
            let Some((feature, threshold)) = split else {
                nodes[id] = leaf;
                continue;
            };
            let column = cols.column(feature);
            let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
                idx.iter().partition(|&&i| column[i] <= threshold);
            let left = nodes.len();
            nodes.push(Node::Leaf { useful_fraction: 0.0 });
            nodes.push(Node::Leaf { useful_fraction: 0.0 });
            nodes[id] = Node::Split {
                feature: feature as u32,
                threshold,
                left: left as u32,
                right: left as u32 + 1,
            };
            stack.push((left + 1, right_idx, depth + 1));
            stack.push((left, left_idx, depth + 1));
        }
        Self { nodes }
    }

    fn leaf_for(&self, row: &[f64]) -> f64 {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf { useful_fraction } => return *useful_fraction,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    id = if row[*feature as usize] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    /// Majority class of the reached leaf; an even split votes Useful.
    pub fn vote(&self, row: &[f64]) -> Label {
        if self.leaf_for(row) >= 0.5 {
            Label::Useful
        } else {
            Label::NotUseful
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], id: usize) -> usize {
            match &nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left as usize).max(go(nodes, *right as usize)),
            }
        }
        go(&self.nodes, 0)
    }
}

/// Examines features in random order until `wanted` non-constant ones have
/// been seen (or all are exhausted), then returns the split among them with
/// the largest Gini decrease. Ties go to the lowest feature index, then the
/// lowest threshold. Zero-decrease splits are accepted.
fn best_split<R: Rng + ?Sized>(
    cols: &Columns,
    y: &[u8],
    idx: &[usize],
    pos: usize,
    wanted: usize,
    rng: &mut R,
    scratch: &mut Scratch,
) -> Option<(usize, f64)> {
    let n = idx.len();
    let dim = cols.dim;
    let mut candidates = Vec::with_capacity(wanted);
    for k in 0..dim {
        let j = rng.gen_range(k..dim);
        scratch.order.swap(k, j);
        let f = scratch.order[k];
        let column = cols.column(f);
        let first = column[idx[0]];
        if idx.iter().any(|&i| column[i] != first) {
            candidates.push(f);
            if candidates.len() == wanted {
                break;
            }
        }
    }
    candidates.sort_unstable();

    let parent = gini_mass(pos, n);
    let mut best: Option<(f64, usize, f64)> = None;
    for f in candidates {
        let column = cols.column(f);
        scratch.pairs.clear();
        scratch.pairs.extend(idx.iter().map(|&i| (column[i], y[i])));
        scratch.pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let mut left_pos = 0;
        for s in 0..n - 1 {
            left_pos += scratch.pairs[s].1 as usize;
            let (lo, hi) = (scratch.pairs[s].0, scratch.pairs[s + 1].0);
            if lo >= hi {
                continue;
            }
            let left_n = s + 1;
            let child = gini_mass(left_pos, left_n) + gini_mass(pos - left_pos, n - left_n);
            let decrease = (parent - child) / n as f64;
            if best.is_none_or(|(d, _, _)| decrease > d) {
                let mid = lo + (hi - lo) / 2.0;
                let threshold = if mid < hi { mid } else { lo };
                best = Some((decrease, f, threshold));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}
