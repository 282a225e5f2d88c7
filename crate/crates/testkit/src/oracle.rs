//! Brute-force oracles built directly from the set definitions, independent
//! of the incremental counting in the implementation.

use std::collections::BTreeSet;

use fairrec_core::demographics::{GroupAssignment, GroupLabel};
use fairrec_core::minority::{ImMode, ThresholdConfig, UmMode};
use fairrec_core::ratings::{ItemId, RatingMatrix, UserId};

/// Item minority values by explicit set enumeration. `None` marks an item
/// the minimum-votes rule leaves neutral.
pub fn im_oracle(
    ratings: &RatingMatrix,
    groups: &GroupAssignment,
    cfg: &ThresholdConfig,
    mode: ImMode,
) -> Vec<(ItemId, Option<f64>)> {
    let triples: Vec<_> = ratings.triples().collect();
    let all_users: BTreeSet<UserId> = triples.iter().map(|t| t.user).collect();
    let minority: BTreeSet<UserId> = all_users
        .iter()
        .copied()
        .filter(|&u| groups.label(u) == Some(GroupLabel::Minority))
        .collect();
    let majority: BTreeSet<UserId> = all_users
        .iter()
        .copied()
        .filter(|&u| groups.label(u) == Some(GroupLabel::Majority))
        .collect();

    let mut out = Vec::new();
    for &item in ratings.items().raw_ids() {
        let liked: BTreeSet<UserId> = triples
            .iter()
            .filter(|t| t.item == item && t.rating >= cfg.like)
            .map(|t| t.user)
            .collect();
        let disliked: BTreeSet<UserId> = triples
            .iter()
            .filter(|t| t.item == item && t.rating <= cfg.dislike)
            .map(|t| t.user)
            .collect();

        let up_major = liked.intersection(&majority).count();
        let down_major = disliked.intersection(&majority).count();
        let up_minor = liked.intersection(&minority).count();
        let down_minor = disliked.intersection(&minority).count();

        let side_major = up_major + down_major;
        let side_minor = up_minor + down_minor;
        let neutral = side_major < cfg.min_side_votes
            || side_minor < cfg.min_side_votes
            || side_major + side_minor == 0
            || (mode == ImMode::ScoreDifference && (side_major == 0 || side_minor == 0));
        if neutral {
            out.push((item, None));
            continue;
        }
        let value = match mode {
            ImMode::Pooled => {
                ((up_major as f64 - down_major as f64) - (up_minor as f64 - down_minor as f64))
                    / (side_major + side_minor) as f64
            }
            ImMode::ScoreDifference => {
                (up_major as f64 - down_major as f64) / side_major as f64
                    - (up_minor as f64 - down_minor as f64) / side_minor as f64
            }
        };
        out.push((item, Some(value)));
    }
    out
}

/// User minority values recomputed from raw triples and oracle item values.
pub fn um_oracle(
    ratings: &RatingMatrix,
    im_values: &[(ItemId, Option<f64>)],
    cfg: &ThresholdConfig,
    mode: UmMode,
) -> Vec<(UserId, f64)> {
    let value_of = |item: ItemId| -> f64 {
        im_values
            .iter()
            .find(|(i, _)| *i == item)
            .and_then(|(_, v)| *v)
            .unwrap_or(0.0)
    };
    let midpoint = (cfg.like as f64 + cfg.dislike as f64) / 2.0;
    let triples: Vec<_> = ratings.triples().collect();
    let mut out = Vec::new();
    for &user in ratings.users().raw_ids() {
        let votes: Vec<_> = triples.iter().filter(|t| t.user == user).collect();
        if votes.is_empty() {
            continue;
        }
        let score: f64 = votes
            .iter()
            .map(|t| (t.rating as f64 - midpoint) * value_of(t.item))
            .sum();
        let denom = match mode {
            UmMode::PerFormula => (ratings.max_rating() as f64 - midpoint) * votes.len() as f64,
            UmMode::ToyDivideByMax => ratings.max_rating() as f64,
        };
        out.push((user, score / denom));
    }
    out
}

/// First `n` items after a full sort by ascending score, ties to the lower id.
pub fn top_n_min(scored: &[(u32, f64)], n: usize) -> Vec<u32> {
    let mut all = scored.to_vec();
    all.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    all.into_iter().take(n).map(|(id, _)| id).collect()
}

/// First `n` items after a full sort by descending score, ties to the lower id.
pub fn top_n_max(scored: &[(u32, f64)], n: usize) -> Vec<u32> {
    let mut all = scored.to_vec();
    all.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    all.into_iter().take(n).map(|(id, _)| id).collect()
}
