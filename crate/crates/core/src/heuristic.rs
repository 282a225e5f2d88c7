//! Demographic-filtered heuristic recommendation.
//!
//! Three phases: score every item the user has not voted, drop candidates on
//! the wrong side of the alpha threshold for the user's group, keep the N
//! highest predictions. Needs the user's minority/majority label, so it
//! cannot serve users without demographics.

use alloc::vec::Vec;
use core::fmt;

use crate::demographics::GroupLabel;
use crate::minority::ImIndex;
use crate::pmf::FactorModel;
use crate::ratings::{ItemId, RatingMatrix, UserId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredCandidate {
    pub item: ItemId,
    pub prediction: f64,
    pub minority_value: f64,
    pub neutral: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum HeuristicError {
    NegativeAlpha(f64),
    /// The user has no demographic label; this path requires one.
    UnknownLabel(UserId),
    UnknownUser(UserId),
    ZeroN,
    MissingItemValue(ItemId),
}

impl fmt::Display for HeuristicError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeuristicError::NegativeAlpha(a) => write!(f, "alpha must be non-negative (got {a})"),
            HeuristicError::UnknownLabel(u) => write!(
                f,
                "user {u} has no demographic label; the filtered method needs one"
            ),
            HeuristicError::UnknownUser(u) => write!(f, "user {u} is not in the rating matrix"),
            HeuristicError::ZeroN => write!(f, "requested list length must be at least 1"),
            HeuristicError::MissingItemValue(i) => write!(f, "item {i} has no minority value"),
        }
    }
}

impl core::error::Error for HeuristicError {}

/// Keeps candidates on the user's group side of the threshold: minority
/// users keep `IM <= -alpha`, majority users keep `IM >= alpha`. Values
/// exactly at the threshold stay. An unknown label is an error.
pub fn filter_by_alpha(
    candidates: Vec<ScoredCandidate>,
    label: Option<GroupLabel>,
    alpha: f64,
    user: UserId,
) -> Result<Vec<ScoredCandidate>, HeuristicError> {
    if alpha < 0.0 {
        return Err(HeuristicError::NegativeAlpha(alpha));
    }
    let label = label.ok_or(HeuristicError::UnknownLabel(user))?;
    Ok(candidates
        .into_iter()
        .filter(|c| match label {
            GroupLabel::Minority => c.minority_value <= -alpha,
            GroupLabel::Majority => c.minority_value >= alpha,
        })
        .collect())
}

/// Top-N list produced by the heuristic, highest prediction first, ties to
/// the lower item id.
#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicList {
    pub user: UserId,
    pub alpha: f64,
    pub requested: usize,
    pub entries: Vec<ScoredCandidate>,
    /// Set when the alpha filter left no candidates at all.
    pub no_candidates: bool,
}

impl HeuristicList {
    pub fn item_ids(&self) -> Vec<ItemId> {
        self.entries.iter().map(|e| e.item).collect()
    }
}

/// All unvoted items of `user` as scored candidates, using `score` over
/// dense item indexes.
pub fn candidates_for(
    score: impl Fn(u32) -> f64,
    im: &ImIndex,
    ratings: &RatingMatrix,
    user: UserId,
) -> Result<Vec<ScoredCandidate>, HeuristicError> {
    let du = ratings.users().dense(user).ok_or(HeuristicError::UnknownUser(user))?;
    let voted: Vec<u32> = ratings.votes_by_user(du).map(|(i, _)| i).collect();
    let mut out = Vec::with_capacity(ratings.num_items() - voted.len());
    for di in 0..ratings.num_items() as u32 {
        if voted.binary_search(&di).is_ok() {
            continue;
        }
        let raw = ratings.items().raw(di).expect("dense item");
        let entry = im.entry(raw).ok_or(HeuristicError::MissingItemValue(raw))?;
        out.push(ScoredCandidate {
            item: raw,
            prediction: score(di),
            minority_value: entry.value,
            neutral: entry.neutral,
        });
    }
    Ok(out)
}

/// The three-phase procedure with an arbitrary scoring function.
pub fn recommend_heuristic_scored(
    score: impl Fn(u32) -> f64,
    im: &ImIndex,
    ratings: &RatingMatrix,
    user: UserId,
    label: Option<GroupLabel>,
    alpha: f64,
    n: usize,
) -> Result<HeuristicList, HeuristicError> {
    if n == 0 {
        return Err(HeuristicError::ZeroN);
    }
    let candidates = candidates_for(score, im, ratings, user)?;
    let mut kept = filter_by_alpha(candidates, label, alpha, user)?;
    let no_candidates = kept.is_empty();
    kept.sort_unstable_by(|a, b| {
        b.prediction
            .total_cmp(&a.prediction)
            .then_with(|| a.item.cmp(&b.item))
    });
    kept.truncate(n);
    Ok(HeuristicList { user, alpha, requested: n, entries: kept, no_candidates })
}

/// The three-phase procedure scored by the factor model.
pub fn recommend_heuristic(
    factors: &FactorModel,
    im: &ImIndex,
    ratings: &RatingMatrix,
    user: UserId,
    label: Option<GroupLabel>,
    alpha: f64,
    n: usize,
) -> Result<HeuristicList, HeuristicError> {
    let du = ratings.users().dense(user).ok_or(HeuristicError::UnknownUser(user))?;
    recommend_heuristic_scored(
        |di| factors.predict(du, di),
        im,
        ratings,
        user,
        label,
        alpha,
        n,
    )
}
