use rand::seq::SliceRandom;
use thiserror::Error;

use crate::grammar::Label;
use crate::rng::{self, derive_seed};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CvConfig {
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            repeats: 3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CvError {
    #[error("cross-validation needs at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("cross-validation needs at least 1 repeat")]
    ZeroRepeats,
    #[error("class {label} has {count} samples, fewer than the {folds} folds")]
    ClassTooSmall { label: Label, count: usize, folds: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub repeat: usize,
    pub fold: usize,
    /// Sorted ascending.
    pub train: Vec<usize>,
    /// Sorted ascending.
    pub test: Vec<usize>,
}

/// `folds * repeats` train/test splits, repeat-major. Within a repeat the
/// test sets partition `0..y.len()`. Each class is shuffled with a stream
/// derived from `(seed, repeat)` and dealt so that every fold receives
/// `floor(n_c / folds)` or one more of that class; the folds that get an
/// extra sample rotate across classes to keep fold sizes even.
pub fn repeated_stratified_kfold(y: &[Label], cfg: &CvConfig) -> Result<Vec<Split>, CvError> {
    if cfg.folds < 2 {
        return Err(CvError::TooFewFolds(cfg.folds));
    }
    if cfg.repeats == 0 {
        return Err(CvError::ZeroRepeats);
    }
    let by_class: Vec<(Label, Vec<usize>)> = Label::ALL
        .iter()
        .map(|&l| (l, (0..y.len()).filter(|&i| y[i] == l).collect()))
        .collect();
    for (label, members) in &by_class {
        if members.len() < cfg.folds {
            return Err(CvError::ClassTooSmall {
                label: *label,
                count: members.len(),
                folds: cfg.folds,
            });
        }
    }

    let mut splits = Vec::with_capacity(cfg.folds * cfg.repeats);
    for repeat in 0..cfg.repeats {
        let mut rng = rng::seeded(derive_seed(cfg.seed, &[repeat as u64]));
        let mut fold_of = vec![0usize; y.len()];
        let mut offset = 0;
        for (_, members) in &by_class {
            let mut shuffled = members.clone();
            shuffled.shuffle(&mut rng);
            let base = shuffled.len() / cfg.folds;
            let extra = shuffled.len() % cfg.folds;
            let mut cursor = 0;
            for f in 0..cfg.folds {
                let fold = (offset + f) % cfg.folds;
                let take = base + usize::from(f < extra);
                for &i in &shuffled[cursor..cursor + take] {
                    fold_of[i] = fold;
                }
                cursor += take;
            }
            offset = (offset + extra) % cfg.folds;
        }
        for fold in 0..cfg.folds {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..y.len()).partition(|&i| fold_of[i] == fold);
            splits.push(Split {
                repeat,
                fold,
                train,
                test,
            });
        }
    }
    Ok(splits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(useful: usize, not_useful: usize) -> Vec<Label> {
        let mut y = vec![Label::Useful; useful];
        y.extend(vec![Label::NotUseful; not_useful]);
        y
    }

    fn class_counts(y: &[Label], idx: &[usize]) -> (usize, usize) {
        let u = idx.iter().filter(|&&i| y[i] == Label::Useful).count();
        (u, idx.len() - u)
    }

    #[test]
    fn thirty_splits() {
        let y = labels(50, 50);
        let splits = repeated_stratified_kfold(&y, &CvConfig::default()).unwrap();
        assert_eq!(splits.len(), 30);
        for s in &splits {
            assert_eq!(class_counts(&y, &s.test), (5, 5));
        }
    }

    #[test]
    fn uneven_classes_within_one() {
        let y = labels(52, 48);
        let splits = repeated_stratified_kfold(&y, &CvConfig { seed: 3, ..Default::default() }).unwrap();
        for s in &splits {
            let (u, n) = class_counts(&y, &s.test);
            assert!(u == 5 || u == 6, "{u}");
            assert!(n == 4 || n == 5, "{n}");
            assert_eq!(s.test.len(), 10);
        }
    }

    #[test]
    fn partitions_each_repeat() {
        let y = labels(37, 23);
        let cfg = CvConfig {
            folds: 7,
            repeats: 2,
            seed: 1,
        };
        let splits = repeated_stratified_kfold(&y, &cfg).unwrap();
        for r in 0..2 {
            let mut seen = vec![0; y.len()];
            for s in splits.iter().filter(|s| s.repeat == r) {
                for &i in &s.test {
                    seen[i] += 1;
                }
                assert_eq!(s.train.len() + s.test.len(), y.len());
                assert!(s.train.iter().all(|i| s.test.binary_search(i).is_err()));
            }
            assert!(seen.iter().all(|&c| c == 1));
        }
        assert_ne!(splits[0].test, splits[7].test, "repeats reshuffle");
    }

    #[test]
    fn errors() {
        let y = labels(20, 5);
        assert_eq!(
            repeated_stratified_kfold(&y, &CvConfig::default()).unwrap_err(),
            CvError::ClassTooSmall {
                label: Label::NotUseful,
                count: 5,
                folds: 10
            }
        );
        let cfg = CvConfig { folds: 1, ..Default::default() };
        assert_eq!(repeated_stratified_kfold(&y, &cfg).unwrap_err(), CvError::TooFewFolds(1));
        let cfg = CvConfig { repeats: 0, folds: 2, seed: 0 };
        assert_eq!(repeated_stratified_kfold(&y, &cfg).unwrap_err(), CvError::ZeroRepeats);
    }

    #[test]
    fn deterministic() {
        let y = labels(33, 41);
        let cfg = CvConfig { seed: 8, ..Default::default() };
        assert_eq!(
            repeated_stratified_kfold(&y, &cfg).unwrap(),
            repeated_stratified_kfold(&y, &cfg).unwrap()
        );
    }
}
