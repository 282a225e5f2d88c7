//! Item and user minority indexes.
//!
//! The item index measures, per item, how much better the majority group
//! rated it than the minority group; negative values mean the minority
//! preferred it. The user index is the rating-weighted average of the item
//! values over a user's votes. Both get frozen min-max `[0,1]` normalizations
//! for use inside the fairness error.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::demographics::{GroupAssignment, GroupLabel};
use crate::ratings::{IdMap, ItemId, RatingMatrix, UserId};

/// Like/dislike vote thresholds and the per-side minimum vote rule.
///
/// A rating `>= like` is a relevant vote, `<= dislike` a non-relevant one,
/// anything strictly between is indifferent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThresholdConfig {
    pub like: u8,
    pub dislike: u8,
    pub min_side_votes: usize,
}

impl ThresholdConfig {
    pub fn new(like: u8, dislike: u8, min_side_votes: usize) -> Self {
        Self { like, dislike, min_side_votes }
    }

    /// MovieLens defaults: like at 4, dislike at 2, five votes per side.
    pub fn movielens() -> Self {
        Self::new(4, 2, 5)
    }

    pub fn midpoint(&self) -> f64 {
        (self.like as f64 + self.dislike as f64) / 2.0
    }

    fn validate(&self, max_rating: u8) -> Result<(), MinorityError> {
        if self.dislike < 1 || self.dislike >= self.like || self.like > max_rating {
            return Err(MinorityError::BadThresholds {
                like: self.like,
                dislike: self.dislike,
                max: max_rating,
            });
        }
        Ok(())
    }
}

/// How the item index combines the two groups' vote balances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImMode {
    /// Single shared denominator; values in [-1, 1]. Matches the worked
    /// toy results and is the default.
    Pooled,
    /// Majority score minus minority score, each with its own denominator;
    /// values in [-2, 2].
    ScoreDifference,
}

/// Which denominator the user index uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UmMode {
    /// Divide by (max rating - threshold midpoint) times the user's vote
    /// count; values in [-1, 1] for pooled item values. The default.
    PerFormula,
    /// Divide by the maximum rating, as in the worked toy table.
    ToyDivideByMax,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MinorityError {
    BadThresholds { like: u8, dislike: u8, max: u8 },
    EmptyGroup(GroupLabel),
    EmptyInput,
    MissingItemValue(ItemId),
}

impl fmt::Display for MinorityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinorityError::BadThresholds { like, dislike, max } => write!(
                f,
                "thresholds must satisfy 1 <= dislike < like <= {max} (got like {like}, dislike {dislike})"
            ),
            MinorityError::EmptyGroup(GroupLabel::Minority) => {
                write!(f, "no minority users present in the rating matrix")
            }
            MinorityError::EmptyGroup(GroupLabel::Majority) => {
                write!(f, "no majority users present in the rating matrix")
            }
            MinorityError::EmptyInput => write!(f, "cannot operate on an empty value set"),
            MinorityError::MissingItemValue(item) => {
                write!(f, "item {item} has no minority value")
            }
        }
    }
}

impl core::error::Error for MinorityError {}

/// Per-item relevant/non-relevant vote counts split by group.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SideCounts {
    pub up_majority: u32,
    pub down_majority: u32,
    pub up_minority: u32,
    pub down_minority: u32,
}

impl SideCounts {
    pub fn majority_total(&self) -> u32 {
        self.up_majority + self.down_majority
    }

    pub fn minority_total(&self) -> u32 {
        self.up_minority + self.down_minority
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImEntry {
    pub value: f64,
    /// Insufficient votes on one side; the zero value is a placeholder, not
    /// evidence of neutrality.
    pub neutral: bool,
    pub counts: SideCounts,
}

/// Item minority index over a rating matrix's item universe.
#[derive(Debug, Clone, PartialEq)]
pub struct ImIndex {
    mode: ImMode,
    items: IdMap,
    entries: Vec<ImEntry>,
}

impl ImIndex {
    pub fn mode(&self) -> ImMode {
        self.mode
    }

    pub fn items(&self) -> &IdMap {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, item: ItemId) -> Option<&ImEntry> {
        let di = self.items.dense(item)?;
        self.entries.get(di as usize)
    }

    pub fn value(&self, item: ItemId) -> Option<f64> {
        self.entry(item).map(|e| e.value)
    }

    pub fn entry_dense(&self, item: u32) -> Option<&ImEntry> {
        self.entries.get(item as usize)
    }

    /// (raw item id, entry) in dense order.
    pub fn iter(&self) -> impl Iterator<Item = (ItemId, &ImEntry)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .map(|(di, e)| (self.items.raw(di as u32).expect("dense item"), e))
    }

    /// Values only, dense order. Neutral items contribute their zero.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.value)
    }

    /// Direct construction from known per-item values, for tests and fixtures.
    pub fn from_values(mode: ImMode, values: &[(ItemId, f64)]) -> Self {
        Self::from_entries(
            mode,
            values.iter().map(|&(raw, value)| (raw, value, false)),
        )
    }

    /// Reconstruction with neutral flags, for reloading exported indexes.
    /// Vote counts are not retained.
    pub fn from_entries(
        mode: ImMode,
        values: impl IntoIterator<Item = (ItemId, f64, bool)>,
    ) -> Self {
        let mut items = IdMap::new();
        let entries = values
            .into_iter()
            .map(|(raw, value, neutral)| {
                items.intern(raw);
                ImEntry { value, neutral, counts: SideCounts::default() }
            })
            .collect();
        Self { mode, items, entries }
    }
}

/// Computes the item minority index on (train) ratings.
///
/// Items where either group casts fewer non-indifferent votes than
/// `cfg.min_side_votes` (or where no non-indifferent vote exists at all) are
/// flagged neutral with value 0. Negative values mean minority-preferred.
pub fn compute_im(
    ratings: &RatingMatrix,
    groups: &GroupAssignment,
    cfg: &ThresholdConfig,
    mode: ImMode,
) -> Result<ImIndex, MinorityError> {
    cfg.validate(ratings.max_rating())?;

    let labels = resolve_labels(ratings, groups)?;

    let entries = (0..ratings.num_items() as u32)
        .map(|di| {
            let mut c = SideCounts::default();
            for &(du, r) in ratings.votes_on_item(di) {
                let label = match labels[du as usize] {
                    Some(l) => l,
                    None => continue,
                };
                let up = r >= cfg.like;
                let down = r <= cfg.dislike;
                match (label, up, down) {
                    (GroupLabel::Majority, true, _) => c.up_majority += 1,
                    (GroupLabel::Majority, _, true) => c.down_majority += 1,
                    (GroupLabel::Minority, true, _) => c.up_minority += 1,
                    (GroupLabel::Minority, _, true) => c.down_minority += 1,
                    _ => {}
                }
            }
            let maj = c.majority_total() as usize;
            let min = c.minority_total() as usize;
            let insufficient = maj < cfg.min_side_votes
                || min < cfg.min_side_votes
                || maj + min == 0
                || (mode == ImMode::ScoreDifference && (maj == 0 || min == 0));
            if insufficient {
                return ImEntry { value: 0.0, neutral: true, counts: c };
            }
            let value = match mode {
                ImMode::Pooled => {
                    let num = (c.up_majority as f64 - c.down_majority as f64)
                        - (c.up_minority as f64 - c.down_minority as f64);
                    num / (maj + min) as f64
                }
                ImMode::ScoreDifference => {
                    let majority_score =
                        (c.up_majority as f64 - c.down_majority as f64) / maj as f64;
                    let minority_score =
                        (c.up_minority as f64 - c.down_minority as f64) / min as f64;
                    majority_score - minority_score
                }
            };
            ImEntry { value, neutral: false, counts: c }
        })
        .collect();

    Ok(ImIndex { mode, items: ratings.items().clone(), entries })
}

/// Dense-user labels, erroring if either group is absent from the matrix.
fn resolve_labels(
    ratings: &RatingMatrix,
    groups: &GroupAssignment,
) -> Result<Vec<Option<GroupLabel>>, MinorityError> {
    let labels: Vec<Option<GroupLabel>> = ratings
        .users()
        .raw_ids()
        .iter()
        .map(|&raw| groups.label(raw))
        .collect();
    for side in [GroupLabel::Minority, GroupLabel::Majority] {
        if !labels.iter().any(|l| *l == Some(side)) {
            return Err(MinorityError::EmptyGroup(side));
        }
    }
    Ok(labels)
}

/// User minority index. Users with no votes carry no value.
#[derive(Debug, Clone, PartialEq)]
pub struct UmIndex {
    mode: UmMode,
    users: IdMap,
    values: Vec<Option<f64>>,
}

impl UmIndex {
    pub fn mode(&self) -> UmMode {
        self.mode
    }

    pub fn users(&self) -> &IdMap {
        &self.users
    }

    pub fn value(&self, user: UserId) -> Option<f64> {
        let du = self.users.dense(user)?;
        self.values.get(du as usize).copied().flatten()
    }

    /// (raw user id, value) for every user that has one, dense order.
    pub fn iter(&self) -> impl Iterator<Item = (UserId, f64)> + '_ {
        self.values.iter().enumerate().filter_map(|(du, v)| {
            v.map(|value| (self.users.raw(du as u32).expect("dense user"), value))
        })
    }

    pub fn len(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }
}

/// Computes the user minority index from ratings and an item index.
///
/// The raw score is the sum over the user's votes of
/// `(rating - threshold midpoint) * item value`; the mode picks the
/// denominator. Every voted item must exist in the item index
/// (neutral-flagged ones contribute their zero value).
pub fn compute_um(
    ratings: &RatingMatrix,
    im: &ImIndex,
    cfg: &ThresholdConfig,
    mode: UmMode,
) -> Result<UmIndex, MinorityError> {
    cfg.validate(ratings.max_rating())?;
    let midpoint = cfg.midpoint();

    // Dense item -> value, validating coverage once up front.
    let item_values: Vec<f64> = ratings
        .items()
        .raw_ids()
        .iter()
        .map(|&raw| im.value(raw).ok_or(MinorityError::MissingItemValue(raw)))
        .collect::<Result<_, _>>()?;

    let values = (0..ratings.num_users() as u32)
        .map(|du| {
            let mut score = 0.0;
            let mut voted = 0usize;
            for (di, r) in ratings.votes_by_user(du) {
                score += (r as f64 - midpoint) * item_values[di as usize];
                voted += 1;
            }
            if voted == 0 {
                return None;
            }
            let denom = match mode {
                UmMode::PerFormula => (ratings.max_rating() as f64 - midpoint) * voted as f64,
                UmMode::ToyDivideByMax => ratings.max_rating() as f64,
            };
            Some(score / denom)
        })
        .collect();

    Ok(UmIndex { mode, users: ratings.users().clone(), values })
}

/// Frozen min-max `[0,1]` normalization of an index.
///
/// The min and max are taken over the population seen at construction;
/// [`NormalizedIndex::project`] maps later values with the same affine map,
/// clamped to `[0,1]`. A constant population maps everything to 0.5.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedIndex {
    values: BTreeMap<u32, f64>,
    min: f64,
    max: f64,
}

impl NormalizedIndex {
    pub fn new(values: impl IntoIterator<Item = (u32, f64)>) -> Result<Self, MinorityError> {
        let raw: BTreeMap<u32, f64> = values.into_iter().collect();
        if raw.is_empty() {
            return Err(MinorityError::EmptyInput);
        }
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for &v in raw.values() {
            min = min.min(v);
            max = max.max(v);
        }
        let mut idx = Self { values: BTreeMap::new(), min, max };
        idx.values = raw.iter().map(|(&id, &v)| (id, idx.project(v))).collect();
        Ok(idx)
    }

    pub fn from_im(im: &ImIndex) -> Result<Self, MinorityError> {
        Self::new(im.iter().map(|(id, e)| (id, e.value)))
    }

    pub fn from_um(um: &UmIndex) -> Result<Self, MinorityError> {
        Self::new(um.iter())
    }

    /// Applies the frozen map to an arbitrary value, clamping to [0,1].
    pub fn project(&self, value: f64) -> f64 {
        if self.max == self.min {
            return 0.5;
        }
        ((value - self.min) / (self.max - self.min)).clamp(0.0, 1.0)
    }

    pub fn value(&self, id: u32) -> Option<f64> {
        self.values.get(&id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.values.iter().map(|(&id, &v)| (id, v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn source_min(&self) -> f64 {
        self.min
    }

    pub fn source_max(&self) -> f64 {
        self.max
    }
}

/// Correct/incorrect sign counts for one group.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GroupCounts {
    pub correct: usize,
    pub incorrect: usize,
}

impl GroupCounts {
    pub fn total(&self) -> usize {
        self.correct + self.incorrect
    }

    pub fn percent_correct(&self) -> f64 {
        if self.total() == 0 {
            return 0.0;
        }
        100.0 * self.correct as f64 / self.total() as f64
    }
}

/// Sign-based classification of users against their group's expected index
/// sign (minority negative, majority positive; an exact zero is incorrect).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassificationTable {
    pub minority: GroupCounts,
    pub majority: GroupCounts,
}

pub fn classify_users(um: &UmIndex, groups: &GroupAssignment) -> ClassificationTable {
    let mut table = ClassificationTable::default();
    for (user, value) in um.iter() {
        let Some(label) = groups.label(user) else { continue };
        let (bucket, correct) = match label {
            GroupLabel::Minority => (&mut table.minority, value < 0.0),
            GroupLabel::Majority => (&mut table.majority, value > 0.0),
        };
        if correct {
            bucket.correct += 1;
        } else {
            bucket.incorrect += 1;
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeMap;
    use alloc::vec;
    use crate::demographics::Scheme;
    use crate::ratings::RatingMatrixBuilder;

    // Five users, four items; users 3 and 4 are the minority.
    fn toy() -> (RatingMatrix, GroupAssignment) {
        let mut b = RatingMatrixBuilder::new(5);
        for (u, i, r) in [
            (1, 1, 5), (1, 2, 2), (1, 4, 4),
            (2, 1, 5), (2, 2, 2), (2, 3, 4), (2, 4, 2),
            (3, 1, 2), (3, 2, 4), (3, 3, 1), (3, 4, 4),
            (4, 1, 1), (4, 2, 5), (4, 3, 4), (4, 4, 5),
            (5, 1, 4), (5, 2, 1), (5, 3, 4), (5, 4, 2),
        ] {
            b.add(u, i, r).unwrap();
        }
        let labels: BTreeMap<_, _> = [
            (1, GroupLabel::Majority),
            (2, GroupLabel::Majority),
            (3, GroupLabel::Minority),
            (4, GroupLabel::Minority),
            (5, GroupLabel::Majority),
        ]
        .into_iter()
        .collect();
        (b.build(), GroupAssignment::from_labels(Scheme::Gender, labels))
    }

    fn toy_cfg() -> ThresholdConfig {
        ThresholdConfig::new(4, 2, 0)
    }

    #[test]
    fn pooled_matches_worked_toy_values() {
        let (m, g) = toy();
        let im = compute_im(&m, &g, &toy_cfg(), ImMode::Pooled).unwrap();
        assert_eq!(im.value(1), Some(1.0));
        assert_eq!(im.value(2), Some(-1.0));
        assert_eq!(im.value(3), Some(0.5));
        assert_eq!(im.value(4), Some(-0.6));
    }

    #[test]
    fn score_difference_doubles_item_a() {
        let (m, g) = toy();
        let im = compute_im(&m, &g, &toy_cfg(), ImMode::ScoreDifference).unwrap();
        // majority 3/3 = 1, minority (0-2)/2 = -1 -> 2
        assert_eq!(im.value(1), Some(2.0));
    }

    #[test]
    fn identical_group_votes_give_zero() {
        let mut b = RatingMatrixBuilder::new(5);
        b.add(1, 1, 5).unwrap();
        b.add(2, 1, 5).unwrap();
        b.add(1, 2, 1).unwrap();
        b.add(2, 2, 1).unwrap();
        let labels: BTreeMap<_, _> =
            [(1, GroupLabel::Majority), (2, GroupLabel::Minority)].into_iter().collect();
        let g = GroupAssignment::from_labels(Scheme::Gender, labels);
        let im = compute_im(&b.build(), &g, &toy_cfg(), ImMode::Pooled).unwrap();
        assert_eq!(im.value(1), Some(0.0));
        assert_eq!(im.value(2), Some(0.0));
    }

    #[test]
    fn min_votes_rule_flags_neutral() {
        let (m, g) = toy();
        let cfg = ThresholdConfig::new(4, 2, 3); // minority side has max 2 voters
        let im = compute_im(&m, &g, &cfg, ImMode::Pooled).unwrap();
        for item in 1..=4 {
            let e = im.entry(item).unwrap();
            assert!(e.neutral, "item {item} should be neutral");
            assert_eq!(e.value, 0.0);
        }
    }

    #[test]
    fn empty_group_is_an_error() {
        let mut b = RatingMatrixBuilder::new(5);
        b.add(1, 1, 5).unwrap();
        let labels: BTreeMap<_, _> = [(1, GroupLabel::Majority)].into_iter().collect();
        let g = GroupAssignment::from_labels(Scheme::Gender, labels);
        assert_eq!(
            compute_im(&b.build(), &g, &toy_cfg(), ImMode::Pooled),
            Err(MinorityError::EmptyGroup(GroupLabel::Minority))
        );
    }

    #[test]
    fn um_toy_mode_matches_worked_table() {
        let (m, g) = toy();
        let im = compute_im(&m, &g, &toy_cfg(), ImMode::Pooled).unwrap();
        let um = compute_um(&m, &im, &toy_cfg(), UmMode::ToyDivideByMax).unwrap();
        let expect = [(1, 0.48), (2, 0.82), (3, -0.72), (4, -0.94), (5, 0.82)];
        for (user, want) in expect {
            let got = um.value(user).unwrap();
            assert!((got - want).abs() < 1e-12, "user {user}: got {got}, want {want}");
        }
    }

    #[test]
    fn um_formula_mode_divides_by_vote_count() {
        let (m, g) = toy();
        let im = compute_im(&m, &g, &toy_cfg(), ImMode::Pooled).unwrap();
        let um = compute_um(&m, &im, &toy_cfg(), UmMode::PerFormula).unwrap();
        // user 1 raw score 2.4 over (5-3)*3 votes
        assert!((um.value(1).unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn midpoint_votes_give_zero_um() {
        let mut b = RatingMatrixBuilder::new(5);
        b.add(1, 1, 3).unwrap();
        b.add(1, 2, 3).unwrap();
        b.add(2, 1, 5).unwrap();
        b.add(3, 1, 1).unwrap();
        let labels: BTreeMap<_, _> =
            [(2, GroupLabel::Majority), (3, GroupLabel::Minority)].into_iter().collect();
        let g = GroupAssignment::from_labels(Scheme::Gender, labels);
        let m = b.build();
        let im = compute_im(&m, &g, &toy_cfg(), ImMode::Pooled).unwrap();
        let um = compute_um(&m, &im, &toy_cfg(), UmMode::PerFormula).unwrap();
        assert_eq!(um.value(1), Some(0.0));
    }

    #[test]
    fn normalize_maps_linearly() {
        let n = NormalizedIndex::new([(1u32, -1.0), (2, 0.0), (3, 1.0)]).unwrap();
        assert_eq!(n.value(1), Some(0.0));
        assert_eq!(n.value(2), Some(0.5));
        assert_eq!(n.value(3), Some(1.0));
    }

    #[test]
    fn normalize_matches_toy_um_arithmetic() {
        let vals = [(1u32, 0.48), (2, 0.82), (3, -0.72), (4, -0.94), (5, 0.82)];
        let n = NormalizedIndex::new(vals).unwrap();
        let expect = [
            (1, 1.42 / 1.76),
            (2, 1.0),
            (3, 0.125),
            (4, 0.0),
            (5, 1.0),
        ];
        for (id, want) in expect {
            assert!((n.value(id).unwrap() - want).abs() < 1e-12, "id {id}");
        }
        // spot value from the derived table
        assert!((n.value(1).unwrap() - 0.80682).abs() < 1e-5);
    }

    #[test]
    fn normalize_constant_degenerates_to_half() {
        let n = NormalizedIndex::new([(1u32, 0.3), (2, 0.3)]).unwrap();
        assert_eq!(n.value(1), Some(0.5));
        assert_eq!(n.value(2), Some(0.5));
        assert_eq!(n.project(7.0), 0.5);
    }

    #[test]
    fn normalize_rejects_empty() {
        assert_eq!(NormalizedIndex::new(vec![]), Err(MinorityError::EmptyInput));
    }

    #[test]
    fn project_clamps_out_of_range() {
        let n = NormalizedIndex::new([(1u32, 0.0), (2, 1.0)]).unwrap();
        assert_eq!(n.project(2.0), 1.0);
        assert_eq!(n.project(-1.0), 0.0);
    }

    #[test]
    fn classification_counts_toy_groups() {
        let (m, g) = toy();
        let im = compute_im(&m, &g, &toy_cfg(), ImMode::Pooled).unwrap();
        let um = compute_um(&m, &im, &toy_cfg(), UmMode::ToyDivideByMax).unwrap();
        let table = classify_users(&um, &g);
        assert_eq!(table.minority, GroupCounts { correct: 2, incorrect: 0 });
        assert_eq!(table.majority, GroupCounts { correct: 3, incorrect: 0 });
        assert_eq!(table.majority.percent_correct(), 100.0);
    }

    #[test]
    fn zero_um_counts_incorrect() {
        let labels: BTreeMap<_, _> =
            [(1, GroupLabel::Minority), (2, GroupLabel::Majority)].into_iter().collect();
        let g = GroupAssignment::from_labels(Scheme::Gender, labels);
        let mut b = RatingMatrixBuilder::new(5);
        b.add(1, 1, 3).unwrap();
        b.add(2, 1, 3).unwrap();
        let m = b.build();
        let im = ImIndex::from_values(ImMode::Pooled, &[(1, 1.0)]);
        let um = compute_um(&m, &im, &toy_cfg(), UmMode::PerFormula).unwrap();
        let table = classify_users(&um, &g);
        assert_eq!(table.minority, GroupCounts { correct: 0, incorrect: 1 });
        assert_eq!(table.majority, GroupCounts { correct: 0, incorrect: 1 });
    }
}
