use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::trial::{Label, Trial, N_CLASSES};
use crate::{Error, Result};

/// Minimum trials per present class for a stratified split.
pub const MIN_PER_CLASS_STRATIFIED: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            seed: 0,
            stratified: true,
        }
    }
}

impl SplitSpec {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

/// Partitions `0..labels.len()` into sorted `(train, test)` index lists.
///
/// Stratified splits shuffle each class separately and send
/// `round(n_class * train_fraction)` of it to training.
pub fn split_indices(labels: &[Label], spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if labels.is_empty() {
        return Err(Error::Argument("cannot split an empty dataset".into()));
    }
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::Argument(format!(
            "train fraction must lie in (0, 1), got {}",
            spec.train_fraction
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut train = Vec::new();
    let mut test = Vec::new();

    let groups: Vec<Vec<usize>> = if spec.stratified {
        let mut by_class = vec![Vec::new(); N_CLASSES];
        for (i, l) in labels.iter().enumerate() {
            by_class[l.index()].push(i);
        }
        for (c, members) in by_class.iter().enumerate() {
            if !members.is_empty() && members.len() < MIN_PER_CLASS_STRATIFIED {
                return Err(Error::Argument(format!(
                    "stratified split needs >= {MIN_PER_CLASS_STRATIFIED} trials of class {}, got {}",
                    Label::ALL[c],
                    members.len()
                )));
            }
        }
        by_class
    } else {
        vec![(0..labels.len()).collect()]
    };

    for mut group in groups {
        group.shuffle(&mut rng);
        let n_train = (group.len() as f64 * spec.train_fraction).round() as usize;
        train.extend_from_slice(&group[..n_train]);
        test.extend_from_slice(&group[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Splits trials into borrowed train and test sets.
pub fn split_dataset<'a>(trials: &'a [Trial], spec: &SplitSpec) -> Result<(Vec<&'a Trial>, Vec<&'a Trial>)> {
    let labels: Vec<Label> = trials.iter().map(|t| t.label).collect();
    let (train, test) = split_indices(&labels, spec)?;
    Ok((
        train.into_iter().map(|i| &trials[i]).collect(),
        test.into_iter().map(|i| &trials[i]).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn balanced(per_class: usize) -> Vec<Label> {
        (0..per_class * N_CLASSES).map(|i| Label::ALL[i % N_CLASSES]).collect()
    }

    #[test]
    fn stratified_counts() {
        let labels = balanced(100);
        let (train, test) = split_indices(&labels, &SplitSpec::default()).unwrap();
        assert_eq!((train.len(), test.len()), (400, 100));
        for l in Label::ALL {
            assert_eq!(train.iter().filter(|&&i| labels[i] == l).count(), 80);
        }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let labels = balanced(20);
        let a = split_indices(&labels, &SplitSpec::with_seed(3)).unwrap();
        let b = split_indices(&labels, &SplitSpec::with_seed(3)).unwrap();
        let c = split_indices(&labels, &SplitSpec::with_seed(4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn errors() {
        assert!(split_indices(&[], &SplitSpec::default()).is_err());
        let few = vec![Label::Forwards; 4];
        assert!(split_indices(&few, &SplitSpec::default()).is_err());
        let unstrat = SplitSpec {
            stratified: false,
            ..SplitSpec::default()
        };
        assert_eq!(split_indices(&few, &unstrat).unwrap().0.len(), 3);
    }

    proptest! {
        #[test]
        fn partition_law(
            raw in prop::collection::vec(0usize..5, 1..300),
            seed in any::<u64>(),
            stratified in any::<bool>(),
            fraction in 0.05f64..0.95,
        ) {
            let labels: Vec<Label> = raw.iter().map(|&i| Label::ALL[i]).collect();
            let spec = SplitSpec { train_fraction: fraction, seed, stratified };
            match split_indices(&labels, &spec) {
                Ok((train, test)) => {
                    let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
                    all.sort_unstable();
                    prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
                    if stratified {
                        for l in Label::ALL {
                            let n = labels.iter().filter(|&&x| x == l).count() as f64;
                            let k = train.iter().filter(|&&i| labels[i] == l).count() as f64;
                            prop_assert!((k - n * fraction).abs() <= 1.0);
                        }
                    }
                }
                Err(_) => prop_assert!(stratified),
            }
        }
    }
}
