//! Matrix factorization trained by per-rating stochastic gradient descent
//! with L2 regularization.
//!
//! The rating matrix is approximated as `P * Q^t`; a prediction is the dot
//! product of a user row of `P` with an item row of `Q`. No bias terms, no
//! rating clipping.

use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fmath;
use crate::ratings::RatingMatrix;

/// User and item latent factors, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    num_users: usize,
    num_items: usize,
    factors: usize,
    p: Vec<f64>,
    q: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PmfError {
    ZeroDimension,
    IndexOutOfRange { user: u32, item: u32 },
    Diverged { epoch: usize, loss: f64 },
    EmptyTrainingSet,
    ZeroEpochs,
    DimensionMismatch,
}

impl fmt::Display for PmfError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PmfError::ZeroDimension => write!(f, "factor model dimensions must be positive"),
            PmfError::IndexOutOfRange { user, item } => {
                write!(f, "index (user {user}, item {item}) outside the factor model")
            }
            PmfError::Diverged { epoch, loss } => write!(
                f,
                "training diverged at epoch {epoch} (loss {loss}); try a smaller learning rate"
            ),
            PmfError::EmptyTrainingSet => write!(f, "training set is empty"),
            PmfError::ZeroEpochs => write!(f, "training needs at least one epoch"),
            PmfError::DimensionMismatch => {
                write!(f, "factor model dimensions do not match the rating matrix")
            }
        }
    }
}

impl core::error::Error for PmfError {}

impl FactorModel {
    /// Factors drawn i.i.d. uniform in `[-scale, scale]`, deterministic
    /// under the seed. A zero scale gives all-zero factors.
    pub fn init(
        num_users: usize,
        num_items: usize,
        factors: usize,
        init_scale: f64,
        seed: u64,
    ) -> Result<Self, PmfError> {
        if num_users == 0 || num_items == 0 || factors == 0 {
            return Err(PmfError::ZeroDimension);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |n: usize| -> Vec<f64> {
            (0..n)
                .map(|_| {
                    if init_scale == 0.0 {
                        0.0
                    } else {
                        rng.gen_range(-init_scale..=init_scale)
                    }
                })
                .collect()
        };
        let p = draw(num_users * factors);
        let q = draw(num_items * factors);
        Ok(Self { num_users, num_items, factors, p, q })
    }

    /// Builds a model from explicit rows, for tests and persistence.
    pub fn from_rows(
        num_users: usize,
        num_items: usize,
        factors: usize,
        p: Vec<f64>,
        q: Vec<f64>,
    ) -> Result<Self, PmfError> {
        if num_users == 0 || num_items == 0 || factors == 0 {
            return Err(PmfError::ZeroDimension);
        }
        if p.len() != num_users * factors || q.len() != num_items * factors {
            return Err(PmfError::DimensionMismatch);
        }
        Ok(Self { num_users, num_items, factors, p, q })
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    pub fn factors(&self) -> usize {
        self.factors
    }

    pub fn user_row(&self, user: u32) -> &[f64] {
        let f = self.factors;
        &self.p[user as usize * f..(user as usize + 1) * f]
    }

    pub fn item_row(&self, item: u32) -> &[f64] {
        let f = self.factors;
        &self.q[item as usize * f..(item as usize + 1) * f]
    }

    pub fn p_data(&self) -> &[f64] {
        &self.p
    }

    pub fn q_data(&self) -> &[f64] {
        &self.q
    }

    /// Dot product of the user and item factor rows; no clipping.
    pub fn predict(&self, user: u32, item: u32) -> f64 {
        dot(self.user_row(user), self.item_row(item))
    }

    pub fn predict_checked(&self, user: u32, item: u32) -> Result<f64, PmfError> {
        if user as usize >= self.num_users || item as usize >= self.num_items {
            return Err(PmfError::IndexOutOfRange { user, item });
        }
        Ok(self.predict(user, item))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// SGD hyperparameters. The defaults are conventional settings; nothing in
/// the evaluation depends on them being exactly these values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub factors: usize,
    pub learning_rate: f64,
    pub regularization: f64,
    pub epochs: usize,
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            factors: 30,
            learning_rate: 0.005,
            regularization: 0.05,
            epochs: 50,
            init_scale: 0.1,
            seed: 42,
        }
    }
}

/// Regularized squared error for one rating: `(r - p.q)^2 + (lambda/2)(|p|^2 + |q|^2)`.
pub fn rating_loss(rating: f64, p_u: &[f64], q_i: &[f64], regularization: f64) -> f64 {
    let e = rating - dot(p_u, q_i);
    let reg: f64 = p_u.iter().map(|v| v * v).sum::<f64>() + q_i.iter().map(|v| v * v).sum::<f64>();
    e * e + 0.5 * regularization * reg
}

/// One seed-shuffled pass over the training ratings.
///
/// Per rating, with `e = r - p.q`: `p_f += rate * (2 q_f e - lambda p_f)` and
/// `q_f += rate * (2 p_f e - lambda q_f)` using the pre-update `p_f` in the
/// `q` rule. Returns the mean regularized loss evaluated after the pass.
pub fn sgd_epoch(
    model: &mut FactorModel,
    train: &[(u32, u32, u8)],
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<f64, PmfError> {
    if train.is_empty() {
        return Err(PmfError::EmptyTrainingSet);
    }
    let f = model.factors;
    let mut order: Vec<usize> = (0..train.len()).collect();
    order.shuffle(rng);

    for &idx in &order {
        let (u, i, r) = train[idx];
        let (pu, qi) = rows_mut(model, u, i)?;
        let e = r as f64 - dot(pu, qi);
        for k in 0..f {
            let p_old = pu[k];
            pu[k] += cfg.learning_rate * (2.0 * qi[k] * e - cfg.regularization * p_old);
            qi[k] += cfg.learning_rate * (2.0 * p_old * e - cfg.regularization * qi[k]);
        }
    }

    let mut total = 0.0;
    for &(u, i, r) in train {
        total += rating_loss(r as f64, model.user_row(u), model.item_row(i), cfg.regularization);
    }
    let mean = total / train.len() as f64;
    if !mean.is_finite() {
        return Err(PmfError::Diverged { epoch: 0, loss: mean });
    }
    Ok(mean)
}

fn rows_mut<'a>(
    model: &'a mut FactorModel,
    user: u32,
    item: u32,
) -> Result<(&'a mut [f64], &'a mut [f64]), PmfError> {
    if user as usize >= model.num_users || item as usize >= model.num_items {
        return Err(PmfError::IndexOutOfRange { user, item });
    }
    let f = model.factors;
    let pu = &mut model.p[user as usize * f..(user as usize + 1) * f];
    let qi = &mut model.q[item as usize * f..(item as usize + 1) * f];
    Ok((pu, qi))
}

/// Per-epoch training trace.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    pub epoch_loss: Vec<f64>,
    pub heldout_mae: Vec<f64>,
    pub heldout_rmse: Vec<f64>,
}

/// Trains factors on dense triples; `heldout` (dense triples as well) is
/// scored with MAE/RMSE after every epoch.
pub fn train_dense(
    num_users: usize,
    num_items: usize,
    train: &[(u32, u32, u8)],
    heldout: &[(u32, u32, u8)],
    cfg: &TrainConfig,
) -> Result<(FactorModel, TrainReport), PmfError> {
    if cfg.epochs == 0 {
        return Err(PmfError::ZeroEpochs);
    }
    if train.is_empty() {
        return Err(PmfError::EmptyTrainingSet);
    }
    let mut model = FactorModel::init(num_users, num_items, cfg.factors, cfg.init_scale, cfg.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut report = TrainReport::default();
    for epoch in 0..cfg.epochs {
        let loss = sgd_epoch(&mut model, train, cfg, &mut rng).map_err(|e| match e {
            PmfError::Diverged { loss, .. } => PmfError::Diverged { epoch, loss },
            other => other,
        })?;
        report.epoch_loss.push(loss);
        if !heldout.is_empty() {
            let (mae, rmse) = score(&model, heldout);
            report.heldout_mae.push(mae);
            report.heldout_rmse.push(rmse);
        }
    }
    Ok((model, report))
}

/// Convenience wrapper over a rating matrix (its dense universe defines the
/// model dimensions).
pub fn train(
    ratings: &RatingMatrix,
    heldout: &[(u32, u32, u8)],
    cfg: &TrainConfig,
) -> Result<(FactorModel, TrainReport), PmfError> {
    train_dense(ratings.num_users(), ratings.num_items(), ratings.dense_entries(), heldout, cfg)
}

/// (MAE, RMSE) of model predictions over dense triples.
pub fn score(model: &FactorModel, triples: &[(u32, u32, u8)]) -> (f64, f64) {
    if triples.is_empty() {
        return (0.0, 0.0);
    }
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    for &(u, i, r) in triples {
        let e = r as f64 - model.predict(u, i);
        abs_sum += fmath::abs(e);
        sq_sum += e * e;
    }
    let n = triples.len() as f64;
    (abs_sum / n, fmath::sqrt(sq_sum / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn init_respects_dimensions_and_seed() {
        let a = FactorModel::init(6040, 3952, 30, 0.1, 7).unwrap();
        assert_eq!(a.p_data().len(), 6040 * 30);
        assert_eq!(a.q_data().len(), 3952 * 30);
        let b = FactorModel::init(6040, 3952, 30, 0.1, 7).unwrap();
        assert_eq!(a, b, "same seed gives identical factors");
        assert!(a.p_data().iter().all(|v| v.abs() <= 0.1));
    }

    #[test]
    fn zero_scale_gives_zero_factors() {
        let m = FactorModel::init(3, 3, 2, 0.0, 0).unwrap();
        assert!(m.p_data().iter().all(|&v| v == 0.0));
        assert_eq!(m.predict(0, 0), 0.0);
    }

    #[test]
    fn init_rejects_zero_dimension() {
        assert_eq!(FactorModel::init(0, 3, 2, 0.1, 0), Err(PmfError::ZeroDimension));
    }

    #[test]
    fn predict_is_the_dot_product() {
        let m = FactorModel::from_rows(1, 1, 2, vec![1.0, 2.0], vec![3.0, -1.0]).unwrap();
        assert_eq!(m.predict(0, 0), 1.0);
        let unit = FactorModel::from_rows(1, 1, 2, vec![1.0, 0.0], vec![1.0, 0.0]).unwrap();
        assert_eq!(unit.predict(0, 0), 1.0);
        assert!(matches!(unit.predict_checked(1, 0), Err(PmfError::IndexOutOfRange { .. })));
    }

    #[test]
    fn zero_error_rating_is_a_fixed_point() {
        let mut m = FactorModel::from_rows(1, 1, 1, vec![1.0], vec![1.0]).unwrap();
        let cfg = TrainConfig { learning_rate: 0.1, regularization: 0.0, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        sgd_epoch(&mut m, &[(0, 0, 1)], &cfg, &mut rng).unwrap();
        assert_eq!(m.p_data(), &[1.0]);
        assert_eq!(m.q_data(), &[1.0]);
    }

    #[test]
    fn single_update_matches_hand_computation() {
        let mut m = FactorModel::from_rows(1, 1, 1, vec![1.0], vec![1.0]).unwrap();
        let cfg = TrainConfig { learning_rate: 0.1, regularization: 0.0, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        sgd_epoch(&mut m, &[(0, 0, 2)], &cfg, &mut rng).unwrap();
        // e = 1: p <- 1 + 0.1*2*1*1 = 1.2, q <- 1 + 0.1*2*1*1 = 1.2 (pre-update p)
        assert!((m.p_data()[0] - 1.2).abs() < 1e-15);
        assert!((m.q_data()[0] - 1.2).abs() < 1e-15);
    }

    #[test]
    fn pure_regularization_shrinks_factors() {
        let mut m = FactorModel::from_rows(1, 1, 1, vec![2.0], vec![0.5]).unwrap();
        // r = p*q exactly, so e = 0 and only the decay term acts.
        let cfg = TrainConfig { learning_rate: 0.1, regularization: 0.5, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        sgd_epoch(&mut m, &[(0, 0, 1)], &cfg, &mut rng).unwrap();
        assert!((m.p_data()[0] - 2.0 * (1.0 - 0.1 * 0.5)).abs() < 1e-15);
        assert!((m.q_data()[0] - 0.5 * (1.0 - 0.1 * 0.5)).abs() < 1e-15);
    }

    #[test]
    fn repeated_updates_converge_to_rating() {
        let mut m = FactorModel::from_rows(1, 1, 1, vec![0.5], vec![0.5]).unwrap();
        let cfg = TrainConfig { learning_rate: 0.05, regularization: 0.0, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut last = f64::INFINITY;
        for _ in 0..200 {
            let loss = sgd_epoch(&mut m, &[(0, 0, 3)], &cfg, &mut rng).unwrap();
            assert!(loss <= last + 1e-12, "squared error must not increase");
            last = loss;
        }
        assert!((m.predict(0, 0) - 3.0).abs() < 1e-3);
    }

    #[test]
    fn divergence_is_reported() {
        let mut m = FactorModel::from_rows(1, 1, 1, vec![1.0], vec![1.0]).unwrap();
        let cfg = TrainConfig { learning_rate: 10.0, regularization: 0.0, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut diverged = false;
        for _ in 0..50 {
            match sgd_epoch(&mut m, &[(0, 0, 5)], &cfg, &mut rng) {
                Err(PmfError::Diverged { .. }) => {
                    diverged = true;
                    break;
                }
                Ok(_) => {}
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(diverged);
    }

    #[test]
    fn zero_epochs_is_an_error() {
        let cfg = TrainConfig { epochs: 0, ..Default::default() };
        assert_eq!(
            train_dense(1, 1, &[(0, 0, 3)], &[], &cfg).unwrap_err(),
            PmfError::ZeroEpochs
        );
    }

    #[test]
    fn training_is_bit_deterministic() {
        let triples: Vec<(u32, u32, u8)> =
            (0..40).map(|k| (k % 8, (k * 3) % 10, (k % 5 + 1) as u8)).collect();
        let cfg = TrainConfig { factors: 4, epochs: 5, ..Default::default() };
        let (a, ra) = train_dense(8, 10, &triples, &[], &cfg).unwrap();
        let (b, rb) = train_dense(8, 10, &triples, &[], &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
    }
}
