//! Ranked recommendation by predicted combined loss.
//!
//! For an active user and a chosen balance beta, every item the user has not
//! voted is scored by the network and the N lowest predicted losses win.
//! This path never consults demographics: the output is a pure function of
//! the two models, the user's rating row, beta and N.

use alloc::vec::Vec;
use core::fmt;

use crate::mln::{MlnError, MlnModel};
use crate::pmf::FactorModel;
use crate::ratings::{ItemId, RatingMatrix, UserId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecEntry {
    pub item: ItemId,
    pub predicted_loss: f64,
}

/// Recommendations in ascending predicted-loss order, ties to the lower
/// item id; at most N entries.
#[derive(Debug, Clone, PartialEq)]
pub struct RecommendationList {
    pub user: UserId,
    pub beta: f64,
    pub requested: usize,
    pub entries: Vec<RecEntry>,
    /// Set when the user has no unvoted item left.
    pub no_candidates: bool,
}

impl RecommendationList {
    pub fn item_ids(&self) -> Vec<ItemId> {
        self.entries.iter().map(|e| e.item).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RecommendError {
    UnknownUser(UserId),
    BetaOutOfRange(f64),
    ZeroN,
    Network(MlnError),
}

impl fmt::Display for RecommendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecommendError::UnknownUser(u) => {
                write!(f, "user {u} has no factor row (cold start is out of scope)")
            }
            RecommendError::BetaOutOfRange(b) => write!(f, "beta must be in [0,1] (got {b})"),
            RecommendError::ZeroN => write!(f, "requested list length must be at least 1"),
            RecommendError::Network(e) => write!(f, "network error: {e}"),
        }
    }
}

impl core::error::Error for RecommendError {}

impl From<MlnError> for RecommendError {
    fn from(e: MlnError) -> Self {
        RecommendError::Network(e)
    }
}

/// Scores every unvoted item with the network and returns the N
/// minimum-loss items.
pub fn recommend_dl(
    mln: &MlnModel,
    factors: &FactorModel,
    ratings: &RatingMatrix,
    user: UserId,
    beta: f64,
    n: usize,
) -> Result<RecommendationList, RecommendError> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(RecommendError::BetaOutOfRange(beta));
    }
    if n == 0 {
        return Err(RecommendError::ZeroN);
    }
    let du = ratings
        .users()
        .dense(user)
        .filter(|&du| (du as usize) < factors.num_users())
        .ok_or(RecommendError::UnknownUser(user))?;

    let voted: Vec<u32> = ratings.votes_by_user(du).map(|(i, _)| i).collect();
    let p_u = factors.user_row(du);
    let mut scored = Vec::with_capacity(ratings.num_items().saturating_sub(voted.len()));
    for di in 0..ratings.num_items() as u32 {
        if voted.binary_search(&di).is_ok() {
            continue;
        }
        let h = mln.predict_loss(p_u, factors.item_row(di), beta)?;
        scored.push(RecEntry {
            item: ratings.items().raw(di).expect("dense item"),
            predicted_loss: h,
        });
    }
    let no_candidates = scored.is_empty();
    scored.sort_unstable_by(|a, b| {
        a.predicted_loss
            .total_cmp(&b.predicted_loss)
            .then_with(|| a.item.cmp(&b.item))
    });
    scored.truncate(n);
    Ok(RecommendationList { user, beta, requested: n, entries: scored, no_candidates })
}

/// Per-user application of [`recommend_dl`]; individual failures are
/// collected and the batch continues.
pub fn recommend_batch(
    mln: &MlnModel,
    factors: &FactorModel,
    ratings: &RatingMatrix,
    users: &[UserId],
    beta: f64,
    n: usize,
) -> (Vec<RecommendationList>, Vec<(UserId, RecommendError)>) {
    let mut lists = Vec::with_capacity(users.len());
    let mut failures = Vec::new();
    for &user in users {
        match recommend_dl(mln, factors, ratings, user, beta, n) {
            Ok(list) => lists.push(list),
            Err(e) => failures.push((user, e)),
        }
    }
    (lists, failures)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::mln::MlnModel;
    use crate::ratings::RatingMatrixBuilder;

    fn constant_net(input: usize, value: f64) -> MlnModel {
        MlnModel::from_params(
            vec![input, 2, 2, 1],
            vec![vec![0.0; input * 2], vec![0.0; 4], vec![0.0; 2]],
            vec![vec![0.0; 2], vec![0.0; 2], vec![value]],
            0.0,
        )
        .unwrap()
    }

    fn setup() -> (FactorModel, RatingMatrix) {
        let mut b = RatingMatrixBuilder::new(5);
        b.add(1, 10, 5).unwrap();
        b.add(1, 20, 3).unwrap();
        b.add(2, 10, 2).unwrap();
        b.add(2, 30, 4).unwrap();
        b.add(2, 40, 1).unwrap();
        let ratings = b.build();
        let factors = FactorModel::init(2, 4, 2, 0.1, 1).unwrap();
        (factors, ratings)
    }

    #[test]
    fn constant_network_breaks_ties_by_item_id() {
        let (factors, ratings) = setup();
        let mln = constant_net(5, 0.7);
        let list = recommend_dl(&mln, &factors, &ratings, 1, 0.5, 2).unwrap();
        // user 1 has 30 and 40 unvoted; equal losses -> lower ids first
        assert_eq!(list.item_ids(), vec![30, 40]);
        assert!((list.entries[0].predicted_loss - 0.7).abs() < 1e-15);
    }

    #[test]
    fn user_with_all_items_voted_gets_flagged_empty_list() {
        let mut b = RatingMatrixBuilder::new(5);
        b.add(1, 10, 5).unwrap();
        let ratings = b.build();
        let factors = FactorModel::init(1, 1, 2, 0.1, 1).unwrap();
        let mln = constant_net(5, 0.0);
        let list = recommend_dl(&mln, &factors, &ratings, 1, 0.0, 3).unwrap();
        assert!(list.no_candidates);
        assert!(list.entries.is_empty());
    }

    #[test]
    fn unknown_user_is_an_error() {
        let (factors, ratings) = setup();
        let mln = constant_net(5, 0.0);
        assert_eq!(
            recommend_dl(&mln, &factors, &ratings, 99, 0.5, 1).unwrap_err(),
            RecommendError::UnknownUser(99)
        );
    }

    #[test]
    fn beta_and_n_preconditions() {
        let (factors, ratings) = setup();
        let mln = constant_net(5, 0.0);
        assert!(matches!(
            recommend_dl(&mln, &factors, &ratings, 1, 1.5, 1),
            Err(RecommendError::BetaOutOfRange(_))
        ));
        assert!(matches!(
            recommend_dl(&mln, &factors, &ratings, 1, 0.5, 0),
            Err(RecommendError::ZeroN)
        ));
    }

    #[test]
    fn batch_collects_failures_and_continues() {
        let (factors, ratings) = setup();
        let mln = constant_net(5, 0.0);
        let (lists, failures) = recommend_batch(&mln, &factors, &ratings, &[1, 99, 2], 0.5, 1);
        assert_eq!(lists.len(), 2);
        assert_eq!(failures.len(), 1);
        assert_eq!(failures[0].0, 99);
    }

    #[test]
    fn empty_user_set_gives_empty_output() {
        let (factors, ratings) = setup();
        let mln = constant_net(5, 0.0);
        let (lists, failures) = recommend_batch(&mln, &factors, &ratings, &[], 0.5, 1);
        assert!(lists.is_empty());
        assert!(failures.is_empty());
    }
}
