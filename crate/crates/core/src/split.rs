//! Deterministic per-rating train/validation/test splits.

use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::fmath;
use crate::ratings::{RatingMatrix, RatingTriple};

/// Split fractions plus the seed that makes the shuffle reproducible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train: f64, validation: f64, test: f64, seed: u64) -> Self {
        Self { train, validation, test, seed }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SplitError {
    BadFractions { sum: f64 },
    NegativeFraction,
}

impl fmt::Display for SplitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitError::BadFractions { sum } => {
                write!(f, "split fractions must sum to 1 (got {sum})")
            }
            SplitError::NegativeFraction => write!(f, "split fractions must be non-negative"),
        }
    }
}

impl core::error::Error for SplitError {}

/// A disjoint cover of the matrix entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSets {
    pub train: Vec<RatingTriple>,
    pub validation: Vec<RatingTriple>,
    pub test: Vec<RatingTriple>,
}

impl SplitSets {
    /// Materializes the training part as a matrix over the parent's id
    /// universe, so dense indexes line up with factor rows.
    pub fn train_matrix(&self, parent: &RatingMatrix) -> RatingMatrix {
        RatingMatrix::from_triples_with_maps(
            parent.max_rating(),
            parent.users().clone(),
            parent.items().clone(),
            &self.train,
        )
        .expect("train triples come from the parent matrix")
    }
}

/// Partitions the rating entries at per-rating granularity.
///
/// Set sizes are the rounded fraction shares (within one entry of exact);
/// identical spec and input reproduce the identical partition.
pub fn split(ratings: &RatingMatrix, spec: &SplitSpec) -> Result<SplitSets, SplitError> {
    if spec.train < 0.0 || spec.validation < 0.0 || spec.test < 0.0 {
        return Err(SplitError::NegativeFraction);
    }
    let sum = spec.train + spec.validation + spec.test;
    if fmath::abs(sum - 1.0) > 1e-9 {
        return Err(SplitError::BadFractions { sum });
    }

    let total = ratings.num_entries();
    let mut order: Vec<usize> = (0..total).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    order.shuffle(&mut rng);

    let n_train = (fmath::round(spec.train * total as f64) as usize).min(total);
    let n_val = (fmath::round(spec.validation * total as f64) as usize).min(total - n_train);

    let triple_at = |idx: usize| {
        let (u, i, r) = ratings.dense_entries()[idx];
        RatingTriple {
            user: ratings.users().raw(u).expect("dense user"),
            item: ratings.items().raw(i).expect("dense item"),
            rating: r,
        }
    };

    let mut sets = SplitSets {
        train: order[..n_train].iter().map(|&i| triple_at(i)).collect(),
        validation: order[n_train..n_train + n_val].iter().map(|&i| triple_at(i)).collect(),
        test: order[n_train + n_val..].iter().map(|&i| triple_at(i)).collect(),
    };
    sets.train.sort_unstable();
    sets.validation.sort_unstable();
    sets.test.sort_unstable();
    Ok(sets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratings::RatingMatrixBuilder;

    fn matrix(n: usize) -> RatingMatrix {
        let mut b = RatingMatrixBuilder::new(5);
        for k in 0..n {
            b.add(k as u32 / 3 + 1, k as u32 % 3 + 1, (k % 5 + 1) as u8).unwrap();
        }
        b.build()
    }

    #[test]
    fn sizes_follow_fractions() {
        let m = matrix(10);
        let s = split(&m, &SplitSpec::new(0.7, 0.1, 0.2, 42)).unwrap();
        assert_eq!(s.train.len(), 7);
        assert_eq!(s.validation.len(), 1);
        assert_eq!(s.test.len(), 2);
    }

    #[test]
    fn empty_validation_is_allowed() {
        let m = matrix(5);
        let s = split(&m, &SplitSpec::new(0.8, 0.0, 0.2, 7)).unwrap();
        assert_eq!(s.train.len(), 4);
        assert_eq!(s.validation.len(), 0);
        assert_eq!(s.test.len(), 1);
    }

    #[test]
    fn identical_spec_reproduces_partition() {
        let m = matrix(23);
        let spec = SplitSpec::new(0.7, 0.1, 0.2, 9);
        assert_eq!(split(&m, &spec).unwrap(), split(&m, &spec).unwrap());
    }

    #[test]
    fn different_seed_changes_partition() {
        let m = matrix(50);
        let a = split(&m, &SplitSpec::new(0.7, 0.1, 0.2, 1)).unwrap();
        let b = split(&m, &SplitSpec::new(0.7, 0.1, 0.2, 2)).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn rejects_bad_fractions() {
        let m = matrix(4);
        assert!(matches!(
            split(&m, &SplitSpec::new(0.7, 0.1, 0.1, 0)),
            Err(SplitError::BadFractions { .. })
        ));
    }

    #[test]
    fn train_matrix_keeps_universe() {
        let m = matrix(10);
        let s = split(&m, &SplitSpec::new(0.5, 0.0, 0.5, 3)).unwrap();
        let t = s.train_matrix(&m);
        assert_eq!(t.num_users(), m.num_users());
        assert_eq!(t.num_items(), m.num_items());
        assert_eq!(t.num_entries(), 5);
    }
}
