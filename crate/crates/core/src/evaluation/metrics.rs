use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammar::Label;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("{truth} true labels but {predicted} predictions")]
    LengthMismatch { truth: usize, predicted: usize },
    #[error("cannot score an empty prediction set")]
    Empty,
}

/// Confusion counts with Useful as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn from_labels(y_true: &[Label], y_pred: &[Label]) -> Self {
        let mut c = Confusion::default();
        for (t, p) in y_true.iter().zip(y_pred) {
            match (t, p) {
                (Label::Useful, Label::Useful) => c.tp += 1,
                (Label::NotUseful, Label::Useful) => c.fp += 1,
                (Label::Useful, Label::NotUseful) => c.fn_ += 1,
                (Label::NotUseful, Label::NotUseful) => c.tn += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ClassMetrics {
    /// Zero denominators give zero, never NaN.
    fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self { precision, recall, f1 }
    }
}

/// Scores for one prediction set. `macro_f1` is the unweighted mean of the
/// two per-class F1 values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub accuracy: f64,
    pub useful: ClassMetrics,
    pub not_useful: ClassMetrics,
    pub macro_f1: f64,
}

impl MetricSet {
    pub fn from_confusion(c: Confusion) -> Self {
        let useful = ClassMetrics::from_counts(c.tp, c.fp, c.fn_);
        let not_useful = ClassMetrics::from_counts(c.tn, c.fn_, c.fp);
        Self {
            accuracy: (c.tp + c.tn) as f64 / c.total() as f64,
            useful,
            not_useful,
            macro_f1: (useful.f1 + not_useful.f1) / 2.0,
        }
    }

    pub fn per_class(&self, label: Label) -> &ClassMetrics {
        match label {
            Label::Useful => &self.useful,
            Label::NotUseful => &self.not_useful,
        }
    }

    fn fields(&self) -> [f64; 8] {
        [
            self.accuracy,
            self.useful.precision,
            self.useful.recall,
            self.useful.f1,
            self.not_useful.precision,
            self.not_useful.recall,
            self.not_useful.f1,
            self.macro_f1,
        ]
    }

    fn from_fields(f: [f64; 8]) -> Self {
        Self {
            accuracy: f[0],
            useful: ClassMetrics {
                precision: f[1],
                recall: f[2],
                f1: f[3],
            },
            not_useful: ClassMetrics {
                precision: f[4],
                recall: f[5],
                f1: f[6],
            },
            macro_f1: f[7],
        }
    }

    /// Field-wise arithmetic mean. Panics on an empty slice.
    pub fn mean(sets: &[MetricSet]) -> MetricSet {
        assert!(!sets.is_empty(), "mean of no metric sets");
        let mut acc = [0.0; 8];
        for s in sets {
            for (a, v) in acc.iter_mut().zip(s.fields()) {
                *a += v;
            }
        }
        let n = sets.len() as f64;
        Self::from_fields(acc.map(|a| a / n))
    }

    /// Field-wise population standard deviation.
    pub fn std_dev(sets: &[MetricSet]) -> MetricSet {
        let mean = Self::mean(sets).fields();
        let mut acc = [0.0; 8];
        for s in sets {
            for ((a, v), m) in acc.iter_mut().zip(s.fields()).zip(mean) {
                *a += (v - m) * (v - m);
            }
        }
        let n = sets.len() as f64;
        Self::from_fields(acc.map(|a| (a / n).sqrt()))
    }
}

pub fn compute_metrics(y_true: &[Label], y_pred: &[Label]) -> Result<MetricSet, MetricsError> {
    if y_true.len() != y_pred.len() {
        return Err(MetricsError::LengthMismatch {
            truth: y_true.len(),
            predicted: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(MetricSet::from_confusion(Confusion::from_labels(y_true, y_pred)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;
    use rand::Rng;

    const U: Label = Label::Useful;
    const N: Label = Label::NotUseful;

    fn labels(tp: usize, fp: usize, fn_: usize, tn: usize) -> (Vec<Label>, Vec<Label>) {
        let mut t = Vec::new();
        let mut p = Vec::new();
        for (n, tl, pl) in [(tp, U, U), (fp, N, U), (fn_, U, N), (tn, N, N)] {
            t.extend(std::iter::repeat_n(tl, n));
            p.extend(std::iter::repeat_n(pl, n));
        }
        (t, p)
    }

    #[test]
    fn hand_case() {
        let (t, p) = labels(3, 1, 2, 4);
        let m = compute_metrics(&t, &p).unwrap();
        assert!((m.useful.precision - 0.75).abs() < 1e-15);
        assert!((m.useful.recall - 0.6).abs() < 1e-15);
        assert!((m.useful.f1 - 2.0 * 0.75 * 0.6 / 1.35).abs() < 1e-15);
        assert!((m.accuracy - 0.7).abs() < 1e-15);
        // Not Useful: tp'=4, fp'=2, fn'=1.
        assert!((m.not_useful.precision - 4.0 / 6.0).abs() < 1e-15);
        assert!((m.not_useful.recall - 0.8).abs() < 1e-15);
    }

    #[test]
    fn perfect_prediction() {
        let y = [U, N, U, N, N];
        let m = compute_metrics(&y, &y).unwrap();
        assert_eq!((m.accuracy, m.useful.f1, m.not_useful.f1, m.macro_f1), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn one_class_predictions_do_not_divide_by_zero() {
        let m = compute_metrics(&[U, N, N, U], &[U, U, U, U]).unwrap();
        assert_eq!(m.not_useful.f1, 0.0);
        assert_eq!(m.not_useful.precision, 0.0);
        assert!(m.macro_f1.is_finite());
        let m = compute_metrics(&[N, N], &[N, N]).unwrap();
        assert_eq!(m.useful, ClassMetrics::default());
    }

    #[test]
    fn errors() {
        assert!(matches!(compute_metrics(&[U], &[]), Err(MetricsError::LengthMismatch { .. })));
        assert_eq!(compute_metrics(&[], &[]), Err(MetricsError::Empty));
    }

    #[test]
    fn mean_and_std() {
        let a = compute_metrics(&[U, N], &[U, N]).unwrap();
        let b = compute_metrics(&[U, N], &[N, U]).unwrap();
        let m = MetricSet::mean(&[a, b]);
        assert_eq!(m.accuracy, 0.5);
        assert_eq!(MetricSet::std_dev(&[a, b]).accuracy, 0.5);
        assert_eq!(MetricSet::std_dev(&[a, a]).macro_f1, 0.0);
    }

    // Oracle: each class scored by enumerating the pairs directly, with the
    // class under test treated as positive.
    fn oracle(t: &[Label], p: &[Label]) -> (f64, [(f64, f64, f64); 2]) {
        let acc = t.iter().zip(p).filter(|(a, b)| a == b).count() as f64 / t.len() as f64;
        let per = |c: Label| {
            let mut tp = 0.0;
            let mut pred_pos = 0.0;
            let mut real_pos = 0.0;
            for (a, b) in t.iter().zip(p) {
                if *b == c {
                    pred_pos += 1.0;
                }
                if *a == c {
                    real_pos += 1.0;
                }
                if *a == c && *b == c {
                    tp += 1.0;
                }
            }
            let pr = if pred_pos == 0.0 { 0.0 } else { tp / pred_pos };
            let rc = if real_pos == 0.0 { 0.0 } else { tp / real_pos };
            let f = if pr + rc == 0.0 { 0.0 } else { 2.0 * pr * rc / (pr + rc) };
            (pr, rc, f)
        };
        (acc, [per(U), per(N)])
    }

    #[test]
    fn agrees_with_enumeration_oracle() {
        let mut r = rng::seeded(2024);
        for _ in 0..200 {
            let n = r.gen_range(1..=100);
            let t: Vec<Label> = (0..n).map(|_| if r.gen_bool(0.5) { U } else { N }).collect();
            let p: Vec<Label> = (0..n).map(|_| if r.gen_bool(0.5) { U } else { N }).collect();
            let m = compute_metrics(&t, &p).unwrap();
            let (acc, [u, nu]) = oracle(&t, &p);
            assert_eq!(m.accuracy, acc);
            assert_eq!((m.useful.precision, m.useful.recall, m.useful.f1), u);
            assert_eq!((m.not_useful.precision, m.not_useful.recall, m.not_useful.f1), nu);
            assert_eq!(m.macro_f1, (u.2 + nu.2) / 2.0);
        }
    }

    proptest! {
        #[test]
        fn macro_f1_symmetric_under_class_swap(pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..60)) {
            let to = |b: bool| if b { U } else { N };
            let t: Vec<Label> = pairs.iter().map(|p| to(p.0)).collect();
            let p: Vec<Label> = pairs.iter().map(|p| to(p.1)).collect();
            let ts: Vec<Label> = t.iter().map(|l| l.flipped()).collect();
            let ps: Vec<Label> = p.iter().map(|l| l.flipped()).collect();
            let a = compute_metrics(&t, &p).unwrap();
            let b = compute_metrics(&ts, &ps).unwrap();
            prop_assert!((a.macro_f1 - b.macro_f1).abs() < 1e-15);
            prop_assert!(a.fields().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
