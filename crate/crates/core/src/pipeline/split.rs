use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::beat::{class_counts, Beat, BeatSource, Task};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    /// Beats per class reserved for the test set.
    pub test_counts: Vec<usize>,
    /// Training beats per class after oversampling.
    pub oversample_target: usize,
    /// Fraction of the non-test beats of each class held out for validation
    /// before oversampling.
    pub val_fraction: f64,
    pub seed: u64,
}

impl SplitConfig {
    /// 800 test beats per class, 88,069 training beats per class.
    pub fn mit_bih(seed: u64) -> Self {
        Self {
            test_counts: vec![800; 4],
            oversample_target: 88_069,
            val_fraction: 0.1,
            seed,
        }
    }

    /// 809 healthy + 2102 MI test beats, 8,400 training beats per class.
    pub fn ptb(seed: u64) -> Self {
        Self {
            test_counts: vec![809, 2102],
            oversample_target: 8_400,
            val_fraction: 0.1,
            seed,
        }
    }

    pub fn for_task(task: Task, seed: u64) -> Self {
        match task {
            Task::MitBih => Self::mit_bih(seed),
            Task::Ptb => Self::ptb(seed),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Split {
    pub train: Vec<Beat>,
    pub validation: Vec<Beat>,
    pub test: Vec<Beat>,
}

/// Reproducibility record of a split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub source_counts: Vec<usize>,
    pub test_counts: Vec<usize>,
    pub validation_counts: Vec<usize>,
    pub train_counts: Vec<usize>,
    pub test_sources: Vec<BeatSource>,
}

impl Split {
    pub fn manifest(&self, seed: u64, source_counts: Vec<usize>) -> SplitManifest {
        let n = source_counts.len();
        SplitManifest {
            seed,
            source_counts,
            test_counts: class_counts(&self.test, n),
            validation_counts: class_counts(&self.validation, n),
            train_counts: class_counts(&self.train, n),
            test_sources: self.test.iter().map(|b| b.source.clone()).collect(),
        }
    }
}

/// Draws the test set per class without replacement, holds out a stratified
/// validation fraction, then randomly oversamples (or subsamples, for classes
/// with more beats than the target) the remainder to `oversample_target` per class.
pub fn split_and_oversample(beats: &[Beat], cfg: &SplitConfig) -> Result<Split> {
    let num_classes = cfg.test_counts.len();
    if !(0.0..1.0).contains(&cfg.val_fraction) {
        return Err(Error::Config(format!(
            "val_fraction {} outside [0, 1)",
            cfg.val_fraction
        )));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    for (i, b) in beats.iter().enumerate() {
        by_class
            .get_mut(b.label)
            .ok_or_else(|| Error::invalid(format!("label {} outside 0..{num_classes}", b.label)))?
            .push(i);
    }
    for (c, idx) in by_class.iter().enumerate() {
        if idx.len() < cfg.test_counts[c] {
            return Err(Error::invalid(format!(
                "class {c}: {} beats available, {} needed for the test set",
                idx.len(),
                cfg.test_counts[c]
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut split = Split {
        train: Vec::with_capacity(cfg.oversample_target * num_classes),
        validation: Vec::new(),
        test: Vec::new(),
    };
    for (c, mut idx) in by_class.into_iter().enumerate() {
        idx.shuffle(&mut rng);
        let (test, rest) = idx.split_at(cfg.test_counts[c]);
        let n_val = (rest.len() as f64 * cfg.val_fraction).round() as usize;
        let (val, pool) = rest.split_at(n_val);
        split.test.extend(test.iter().map(|&i| beats[i].clone()));
        split
            .validation
            .extend(val.iter().map(|&i| beats[i].clone()));
        if pool.is_empty() {
            if cfg.oversample_target > 0 {
                return Err(Error::invalid(format!(
                    "class {c}: no beats left to oversample"
                )));
            }
            continue;
        }
        if pool.len() >= cfg.oversample_target {
            split.train.extend(
                pool[..cfg.oversample_target]
                    .iter()
                    .map(|&i| beats[i].clone()),
            );
        } else {
            split.train.extend(pool.iter().map(|&i| beats[i].clone()));
            for _ in pool.len()..cfg.oversample_target {
                let i = pool[rng.gen_range(0..pool.len())];
                split.train.push(beats[i].clone());
            }
        }
    }
    split.train.shuffle(&mut rng);
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beat::BEAT_LEN;
    use std::collections::HashSet;

    fn pool(counts: &[usize]) -> Vec<Beat> {
        let mut out = Vec::new();
        for (c, &n) in counts.iter().enumerate() {
            for i in 0..n {
                let source = BeatSource {
                    record: format!("r{c}"),
                    window: i / 10,
                    peak: i % 10,
                };
                out.push(Beat::new(vec![c as f64 / 4.0; BEAT_LEN], c, None, source).unwrap());
            }
        }
        out
    }

    #[test]
    fn counts_and_separation() {
        let beats = pool(&[500, 60, 120, 90]);
        let cfg = SplitConfig {
            test_counts: vec![20; 4],
            oversample_target: 600,
            val_fraction: 0.1,
            seed: 7,
        };
        let s = split_and_oversample(&beats, &cfg).unwrap();
        assert_eq!(class_counts(&s.test, 4), vec![20; 4]);
        assert_eq!(class_counts(&s.train, 4), vec![600; 4]);
        assert_eq!(class_counts(&s.validation, 4), vec![48, 4, 10, 7]);
        let test: HashSet<_> = s.test.iter().map(|b| &b.source).collect();
        let val: HashSet<_> = s.validation.iter().map(|b| &b.source).collect();
        assert!(s
            .train
            .iter()
            .all(|b| !test.contains(&b.source) && !val.contains(&b.source)));
        assert!(val.is_disjoint(&test));
    }

    #[test]
    fn balanced_input_is_a_permutation() {
        let beats = pool(&[30, 30]);
        let cfg = SplitConfig {
            test_counts: vec![5, 5],
            oversample_target: 25,
            val_fraction: 0.0,
            seed: 1,
        };
        let s = split_and_oversample(&beats, &cfg).unwrap();
        let test: HashSet<_> = s.test.iter().map(|b| b.source.clone()).collect();
        let mut expected: Vec<_> = beats
            .iter()
            .map(|b| b.source.clone())
            .filter(|s| !test.contains(s))
            .collect();
        let mut got: Vec<_> = s.train.iter().map(|b| b.source.clone()).collect();
        expected.sort();
        got.sort();
        assert_eq!(got, expected);
    }

    #[test]
    fn insufficient_test_quota() {
        let beats = pool(&[10, 3]);
        let cfg = SplitConfig {
            test_counts: vec![5, 5],
            oversample_target: 10,
            val_fraction: 0.0,
            seed: 1,
        };
        assert!(split_and_oversample(&beats, &cfg).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let beats = pool(&[100, 40]);
        let cfg = SplitConfig {
            test_counts: vec![10, 10],
            oversample_target: 120,
            val_fraction: 0.1,
            seed: 99,
        };
        let a = split_and_oversample(&beats, &cfg).unwrap();
        let b = split_and_oversample(&beats, &cfg).unwrap();
        assert_eq!(a.train, b.train);
        assert_eq!(a.test, b.test);
    }
}
