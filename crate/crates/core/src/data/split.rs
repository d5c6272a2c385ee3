use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng::{purpose, rng_for};

/// Per-class split: a `reserve_fraction` of every class is held out of the
/// unlabeled pool and divided into train/validation/test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    pub reserve_fraction: f64,
    pub train: f64,
    pub val: f64,
    pub test: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            reserve_fraction: 0.5,
            train: 0.4,
            val: 0.2,
            test: 0.4,
            seed: 0,
        }
    }
}

impl SplitConfig {
    pub fn validate(&self) -> Result<()> {
        let fr = [self.reserve_fraction, self.train, self.val, self.test];
        if fr.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::Config("split fractions must lie in [0,1]".into()));
        }
        let sum = self.train + self.val + self.test;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("train+val+test must equal 1, got {sum}")));
        }
        Ok(())
    }

    /// (train, val, test, pool) sizes for a class of `n` instances.
    pub fn class_counts(&self, n: usize) -> (usize, usize, usize, usize) {
        let reserve = floor_frac(self.reserve_fraction, n);
        let train = floor_frac(self.train, reserve);
        let val = floor_frac(self.val, reserve);
        (train, val, reserve - train - val, n - reserve)
    }
}

// the epsilon absorbs representation error, e.g. 0.4 * 20
fn floor_frac(f: f64, n: usize) -> usize {
    ((f * n as f64 + 1e-9).floor() as usize).min(n)
}

/// Index partition of a dataset: labeled (S_l), validation (S_v), test (S_d)
/// and unlabeled pool (S_u).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolState {
    pub labeled: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
    pub pool: Vec<usize>,
}

impl PoolState {
    pub fn total(&self) -> usize {
        self.labeled.len() + self.validation.len() + self.test.len() + self.pool.len()
    }

    /// Checks pairwise disjointness and that every index is below `n`.
    pub fn check_partition(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for (name, set) in [
            ("labeled", &self.labeled),
            ("validation", &self.validation),
            ("test", &self.test),
            ("pool", &self.pool),
        ] {
            for &i in set {
                if i >= n {
                    return Err(Error::Contract(format!("{name} index {i} out of range")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::Contract(format!("index {i} appears twice ({name})")));
                }
            }
        }
        Ok(())
    }

    /// Moves `ids` from the pool into the labeled set.
    pub fn move_to_labeled(&mut self, ids: &[usize]) -> Result<()> {
        for &id in ids {
            let pos = self
                .pool
                .iter()
                .position(|&p| p == id)
                .ok_or_else(|| Error::Contract(format!("index {id} is not in the unlabeled pool")))?;
            self.pool.remove(pos);
            self.labeled.push(id);
        }
        Ok(())
    }
}

pub fn split_pools(dataset: &Dataset, cfg: &SplitConfig) -> Result<PoolState> {
    cfg.validate()?;
    let mut by_class = vec![Vec::new(); dataset.num_classes];
    for i in 0..dataset.len() {
        by_class[dataset.label(i)?].push(i);
    }
    let mut state = PoolState {
        labeled: Vec::new(),
        validation: Vec::new(),
        test: Vec::new(),
        pool: Vec::new(),
    };
    for (class, mut members) in by_class.into_iter().enumerate() {
        if members.len() < 4 {
            return Err(Error::Contract(format!(
                "class {class} has {} instances, at least 4 required",
                members.len()
            )));
        }
        members.shuffle(&mut rng_for(cfg.seed, &[purpose::SPLIT, class as u64]));
        let (tr, va, te, _) = cfg.class_counts(members.len());
        state.labeled.extend_from_slice(&members[..tr]);
        state.validation.extend_from_slice(&members[tr..tr + va]);
        state.test.extend_from_slice(&members[tr + va..tr + va + te]);
        state.pool.extend_from_slice(&members[tr + va + te..]);
    }
    for set in [&mut state.labeled, &mut state.validation, &mut state.test, &mut state.pool] {
        set.sort_unstable();
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::AudioClip;

    fn dataset(per_class: &[usize]) -> Dataset {
        let mut clips = Vec::new();
        for (c, &n) in per_class.iter().enumerate() {
            for k in 0..n {
                clips.push(AudioClip {
                    id: format!("{c}-{k}"),
                    samples: vec![0.0],
                    rate: 1.0,
                    label: Some(c),
                });
            }
        }
        Dataset::new(clips, per_class.len()).unwrap()
    }

    fn per_class(ds: &Dataset, set: &[usize]) -> Vec<usize> {
        let mut h = vec![0; ds.num_classes];
        for &i in set {
            h[ds.label(i).unwrap()] += 1;
        }
        h
    }

    #[test]
    fn esc50_like_counts() {
        let ds = dataset(&[40, 40, 40]);
        let s = split_pools(&ds, &SplitConfig::default()).unwrap();
        assert_eq!(per_class(&ds, &s.labeled), vec![8; 3]);
        assert_eq!(per_class(&ds, &s.validation), vec![4; 3]);
        assert_eq!(per_class(&ds, &s.test), vec![8; 3]);
        assert_eq!(per_class(&ds, &s.pool), vec![20; 3]);
        s.check_partition(ds.len()).unwrap();
    }

    #[test]
    fn exhaustive_class_sizes_partition() {
        let cfg = SplitConfig::default();
        let sizes: Vec<usize> = (4..=100).collect();
        let ds = dataset(&sizes);
        let s = split_pools(&ds, &cfg).unwrap();
        s.check_partition(ds.len()).unwrap();
        assert_eq!(s.total(), ds.len());
        let (tr, va, te, po) = (
            per_class(&ds, &s.labeled),
            per_class(&ds, &s.validation),
            per_class(&ds, &s.test),
            per_class(&ds, &s.pool),
        );
        for (c, &n) in sizes.iter().enumerate() {
            // closed form: reserve = floor(0.5 n), train = floor(0.4 r), val = floor(0.2 r)
            let r = n / 2;
            let t = (2 * r) / 5;
            let v = r / 5;
            assert_eq!((tr[c], va[c], te[c], po[c]), (t, v, r - t - v, n - r), "class size {n}");
        }
    }

    #[test]
    fn reserve_extremes() {
        let ds = dataset(&[10, 10]);
        let all = SplitConfig {
            reserve_fraction: 1.0,
            ..SplitConfig::default()
        };
        assert!(split_pools(&ds, &all).unwrap().pool.is_empty());
        let none = SplitConfig {
            reserve_fraction: 0.0,
            ..SplitConfig::default()
        };
        let s = split_pools(&ds, &none).unwrap();
        assert_eq!(s.pool.len(), 20);
        assert!(s.labeled.is_empty());
    }

    #[test]
    fn bad_fractions_and_tiny_classes() {
        let ds = dataset(&[10, 10]);
        let bad = SplitConfig {
            test: 0.5,
            ..SplitConfig::default()
        };
        assert!(matches!(split_pools(&ds, &bad), Err(Error::Config(_))));
        assert!(split_pools(&dataset(&[10, 3]), &SplitConfig::default()).is_err());
    }

    #[test]
    fn move_to_labeled_keeps_partition() {
        let ds = dataset(&[20, 20]);
        let mut s = split_pools(&ds, &SplitConfig::default()).unwrap();
        let ids = s.pool[..3].to_vec();
        s.move_to_labeled(&ids).unwrap();
        s.check_partition(ds.len()).unwrap();
        assert_eq!(s.total(), ds.len());
        assert!(s.move_to_labeled(&ids[..1]).is_err());
    }
}
