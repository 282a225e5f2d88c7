//! Measurements over indexes, predictions and recommendation lists:
//! distributions, per-group index means, error curves over the alpha and
//! beta grids, and the normalized-optimum selection.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::demographics::{GroupAssignment, GroupLabel};
use crate::fmath;
use crate::heuristic::{self, HeuristicError};
use crate::minority::{ImIndex, NormalizedIndex};
use crate::mln::MlnModel;
use crate::pmf::FactorModel;
use crate::ratings::{ItemId, RatingMatrix, RatingTriple, UserId};
use crate::recommend::{self, RecommendError};

#[derive(Debug, Clone, PartialEq)]
pub enum EvaluateError {
    EmptyInput,
    ZeroBins,
    EmptyGroup(GroupLabel),
    MissingItemValue(ItemId),
    MissingUserValue(UserId),
    ZeroCoverage { x: f64 },
    Recommend(RecommendError),
    Heuristic(HeuristicError),
}

impl fmt::Display for EvaluateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvaluateError::EmptyInput => write!(f, "cannot evaluate an empty input"),
            EvaluateError::ZeroBins => write!(f, "histogram needs at least one bin"),
            EvaluateError::EmptyGroup(GroupLabel::Minority) => {
                write!(f, "no minority user contributed to the measurement")
            }
            EvaluateError::EmptyGroup(GroupLabel::Majority) => {
                write!(f, "no majority user contributed to the measurement")
            }
            EvaluateError::MissingItemValue(i) => write!(f, "item {i} has no index value"),
            EvaluateError::MissingUserValue(u) => write!(f, "user {u} has no index value"),
            EvaluateError::ZeroCoverage { x } => {
                write!(f, "no recommended item has held-out ground truth at grid point {x}")
            }
            EvaluateError::Recommend(e) => write!(f, "{e}"),
            EvaluateError::Heuristic(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for EvaluateError {}

impl From<RecommendError> for EvaluateError {
    fn from(e: RecommendError) -> Self {
        EvaluateError::Recommend(e)
    }
}

impl From<HeuristicError> for EvaluateError {
    fn from(e: HeuristicError) -> Self {
        EvaluateError::Heuristic(e)
    }
}

/// Uniform-width histogram over `[min, max]` of the input values.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub min: f64,
    pub max: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Index of the most populated bin (first on ties).
    pub fn modal_bin(&self) -> usize {
        let mut best = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            if c > self.counts[best] {
                best = i;
            }
        }
        best
    }

    /// Bin that a value falls into under this histogram's edges.
    pub fn bin_of(&self, value: f64) -> usize {
        if self.max == self.min {
            return 0;
        }
        let bins = self.counts.len();
        let pos = (value - self.min) / (self.max - self.min) * bins as f64;
        (fmath::floor(pos) as usize).min(bins - 1)
    }
}

pub fn histogram(values: &[f64], bins: usize) -> Result<Histogram, EvaluateError> {
    if values.is_empty() {
        return Err(EvaluateError::EmptyInput);
    }
    if bins == 0 {
        return Err(EvaluateError::ZeroBins);
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in values {
        min = min.min(v);
        max = max.max(v);
    }
    let mut h = Histogram { min, max, counts: alloc::vec![0; bins] };
    for &v in values {
        let b = h.bin_of(v);
        h.counts[b] += 1;
    }
    Ok(h)
}

/// Per-group mean of the item index over recommended/predicted items.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupImMeans {
    pub minority: f64,
    pub majority: f64,
    pub minority_items: usize,
    pub majority_items: usize,
}

/// Mean item minority value over all items listed for each group's users.
/// Users without a label are skipped; an empty group is an error.
pub fn group_im_mean(
    lists: &[(UserId, Vec<ItemId>)],
    im: &ImIndex,
    groups: &GroupAssignment,
) -> Result<GroupImMeans, EvaluateError> {
    let mut sums = [0.0; 2];
    let mut counts = [0usize; 2];
    for (user, items) in lists {
        let Some(label) = groups.label(*user) else { continue };
        let g = (label == GroupLabel::Majority) as usize;
        for &item in items {
            let v = im.value(item).ok_or(EvaluateError::MissingItemValue(item))?;
            sums[g] += v;
            counts[g] += 1;
        }
    }
    if counts[0] == 0 {
        return Err(EvaluateError::EmptyGroup(GroupLabel::Minority));
    }
    if counts[1] == 0 {
        return Err(EvaluateError::EmptyGroup(GroupLabel::Majority));
    }
    Ok(GroupImMeans {
        minority: sums[0] / counts[0] as f64,
        majority: sums[1] / counts[1] as f64,
        minority_items: counts[0],
        majority_items: counts[1],
    })
}

/// Mean squared prediction error restricted to recommended items with
/// held-out ground truth, plus how much of the lists that covered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyReport {
    /// `None` when nothing was covered.
    pub mse: Option<f64>,
    pub covered: usize,
    pub total: usize,
}

impl AccuracyReport {
    pub fn coverage(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.covered as f64 / self.total as f64
    }
}

/// Scores recommended items against held-out ratings with `predict` giving
/// the model's value for a (user, item) pair.
pub fn accuracy_error(
    lists: &[(UserId, Vec<ItemId>)],
    predict: impl Fn(UserId, ItemId) -> Option<f64>,
    heldout: &[RatingTriple],
) -> AccuracyReport {
    let truth: BTreeMap<(UserId, ItemId), u8> =
        heldout.iter().map(|t| ((t.user, t.item), t.rating)).collect();
    let mut sq_sum = 0.0;
    let mut covered = 0usize;
    let mut total = 0usize;
    for (user, items) in lists {
        for &item in items {
            total += 1;
            let Some(&r) = truth.get(&(*user, item)) else { continue };
            let Some(p) = predict(*user, item) else { continue };
            let e = r as f64 - p;
            sq_sum += e * e;
            covered += 1;
        }
    }
    AccuracyReport {
        mse: (covered > 0).then(|| sq_sum / covered as f64),
        covered,
        total,
    }
}

/// Per-group fairness error of recommendation lists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FairnessReport {
    pub minority: f64,
    pub majority: f64,
    pub minority_users: usize,
    pub majority_users: usize,
}

/// Per user: squared distance between the user's normalized index value and
/// the mean normalized item value of their list; averaged within each group.
/// Users with empty lists or no label are skipped; a listed user without a
/// normalized value is an error.
pub fn fairness_error(
    lists: &[(UserId, Vec<ItemId>)],
    um_norm: &NormalizedIndex,
    im_norm: &NormalizedIndex,
    groups: &GroupAssignment,
) -> Result<FairnessReport, EvaluateError> {
    let mut sums = [0.0; 2];
    let mut counts = [0usize; 2];
    for (user, items) in lists {
        if items.is_empty() {
            continue;
        }
        let Some(label) = groups.label(*user) else { continue };
        let um = um_norm.value(*user).ok_or(EvaluateError::MissingUserValue(*user))?;
        let mut im_sum = 0.0;
        for &item in items {
            im_sum += im_norm.value(item).ok_or(EvaluateError::MissingItemValue(item))?;
        }
        let d = um - im_sum / items.len() as f64;
        let g = (label == GroupLabel::Majority) as usize;
        sums[g] += d * d;
        counts[g] += 1;
    }
    if counts[0] == 0 {
        return Err(EvaluateError::EmptyGroup(GroupLabel::Minority));
    }
    if counts[1] == 0 {
        return Err(EvaluateError::EmptyGroup(GroupLabel::Majority));
    }
    Ok(FairnessReport {
        minority: sums[0] / counts[0] as f64,
        majority: sums[1] / counts[1] as f64,
        minority_users: counts[0],
        majority_users: counts[1],
    })
}

/// One grid point of an error sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub x: f64,
    pub accuracy: f64,
    pub fairness_minority: f64,
    pub fairness_majority: f64,
}

/// Min-max normalizes each series across the sweep; a constant series maps
/// to 0.5 everywhere, so raw argmin/argmax positions are preserved.
pub fn normalize_curves(points: &[CurvePoint]) -> Vec<CurvePoint> {
    fn series(points: &[CurvePoint], pick: impl Fn(&CurvePoint) -> f64) -> Vec<f64> {
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in points {
            min = min.min(pick(p));
            max = max.max(pick(p));
        }
        points
            .iter()
            .map(|p| if max == min { 0.5 } else { (pick(p) - min) / (max - min) })
            .collect()
    }
    let acc = series(points, |p| p.accuracy);
    let fmin = series(points, |p| p.fairness_minority);
    let fmaj = series(points, |p| p.fairness_majority);
    points
        .iter()
        .enumerate()
        .map(|(k, p)| CurvePoint {
            x: p.x,
            accuracy: acc[k],
            fairness_minority: fmin[k],
            fairness_majority: fmaj[k],
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaSweepResult {
    pub points: Vec<CurvePoint>,
    pub normalized: Vec<CurvePoint>,
    pub optimum_beta: f64,
    pub coverage: Vec<f64>,
}

/// Runs N-item recommendation for every user at each beta and measures the
/// accuracy and per-group fairness errors. The optimum beta minimizes the
/// normalized accuracy error plus the mean normalized fairness error, ties
/// to the lower beta.
#[allow(clippy::too_many_arguments)]
pub fn beta_sweep(
    mln: &MlnModel,
    factors: &FactorModel,
    train_ratings: &RatingMatrix,
    heldout: &[RatingTriple],
    groups: &GroupAssignment,
    um_norm: &NormalizedIndex,
    im_norm: &NormalizedIndex,
    users: &[UserId],
    beta_grid: &[f64],
    n: usize,
) -> Result<BetaSweepResult, EvaluateError> {
    if beta_grid.is_empty() || users.is_empty() {
        return Err(EvaluateError::EmptyInput);
    }
    let mut points = Vec::with_capacity(beta_grid.len());
    let mut coverage = Vec::with_capacity(beta_grid.len());
    for &beta in beta_grid {
        let (lists, failures) =
            recommend::recommend_batch(mln, factors, train_ratings, users, beta, n);
        if let Some((_, e)) = failures.into_iter().next() {
            return Err(e.into());
        }
        let pairs: Vec<(UserId, Vec<ItemId>)> =
            lists.iter().map(|l| (l.user, l.item_ids())).collect();
        let acc = accuracy_error(
            &pairs,
            |user, item| {
                let du = train_ratings.users().dense(user)?;
                let di = train_ratings.items().dense(item)?;
                Some(factors.predict(du, di))
            },
            heldout,
        );
        let mse = acc.mse.ok_or(EvaluateError::ZeroCoverage { x: beta })?;
        let fair = fairness_error(&pairs, um_norm, im_norm, groups)?;
        points.push(CurvePoint {
            x: beta,
            accuracy: mse,
            fairness_minority: fair.minority,
            fairness_majority: fair.majority,
        });
        coverage.push(acc.coverage());
    }
    let normalized = normalize_curves(&points);
    let mut best = 0usize;
    let mut best_score = f64::INFINITY;
    for (k, p) in normalized.iter().enumerate() {
        let score = p.accuracy + 0.5 * (p.fairness_minority + p.fairness_majority);
        if score < best_score {
            best_score = score;
            best = k;
        }
    }
    Ok(BetaSweepResult {
        optimum_beta: points[best].x,
        points,
        normalized,
        coverage,
    })
}

/// One grid point of the heuristic sweep: survivor minority levels per group
/// (the filtered-prediction measure) and top-N recommendation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaCurvePoint {
    pub x: f64,
    pub mean_abs_im_minority: f64,
    pub mean_abs_im_majority: f64,
    pub accuracy: f64,
    pub accuracy_minority: Option<f64>,
    pub accuracy_majority: Option<f64>,
    pub coverage: f64,
    pub survivors_minority: usize,
    pub survivors_majority: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSweepResult {
    pub points: Vec<AlphaCurvePoint>,
}

/// Sweeps the heuristic filter threshold. Per alpha: mean |IM| over each
/// group's surviving predictions, and the recommendation error of the
/// filtered top-N lists against the held-out set (pooled and per group).
/// Users without demographics are skipped (this path requires labels).
#[allow(clippy::too_many_arguments)]
pub fn alpha_sweep(
    factors: &FactorModel,
    im: &ImIndex,
    train_ratings: &RatingMatrix,
    heldout: &[RatingTriple],
    groups: &GroupAssignment,
    users: &[UserId],
    alpha_grid: &[f64],
    n: usize,
) -> Result<AlphaSweepResult, EvaluateError> {
    if alpha_grid.is_empty() || users.is_empty() {
        return Err(EvaluateError::EmptyInput);
    }
    let mut points = Vec::with_capacity(alpha_grid.len());
    for &alpha in alpha_grid {
        let mut abs_sums = [0.0; 2];
        let mut abs_counts = [0usize; 2];
        let mut lists: Vec<(UserId, Vec<ItemId>)> = Vec::new();
        let mut group_lists: [Vec<(UserId, Vec<ItemId>)>; 2] = [Vec::new(), Vec::new()];
        for &user in users {
            let Some(label) = groups.label(user) else { continue };
            let g = (label == GroupLabel::Majority) as usize;
            let du = train_ratings
                .users()
                .dense(user)
                .ok_or(HeuristicError::UnknownUser(user))
                .map_err(EvaluateError::from)?;
            let candidates =
                heuristic::candidates_for(|di| factors.predict(du, di), im, train_ratings, user)?;
            let kept = heuristic::filter_by_alpha(candidates, Some(label), alpha, user)?;
            for c in &kept {
                abs_sums[g] += fmath::abs(c.minority_value);
                abs_counts[g] += 1;
            }
            let mut top = kept;
            top.sort_unstable_by(|a, b| {
                b.prediction.total_cmp(&a.prediction).then_with(|| a.item.cmp(&b.item))
            });
            top.truncate(n);
            let pair = (user, top.into_iter().map(|c| c.item).collect::<Vec<_>>());
            group_lists[g].push(pair.clone());
            lists.push(pair);
        }
        if abs_counts[0] == 0 {
            return Err(EvaluateError::EmptyGroup(GroupLabel::Minority));
        }
        if abs_counts[1] == 0 {
            return Err(EvaluateError::EmptyGroup(GroupLabel::Majority));
        }
        let predict = |user: UserId, item: ItemId| {
            let du = train_ratings.users().dense(user)?;
            let di = train_ratings.items().dense(item)?;
            Some(factors.predict(du, di))
        };
        let acc = accuracy_error(&lists, predict, heldout);
        let mse = acc.mse.ok_or(EvaluateError::ZeroCoverage { x: alpha })?;
        let acc_min = accuracy_error(&group_lists[0], predict, heldout);
        let acc_maj = accuracy_error(&group_lists[1], predict, heldout);
        points.push(AlphaCurvePoint {
            x: alpha,
            mean_abs_im_minority: abs_sums[0] / abs_counts[0] as f64,
            mean_abs_im_majority: abs_sums[1] / abs_counts[1] as f64,
            accuracy: mse,
            accuracy_minority: acc_min.mse,
            accuracy_majority: acc_maj.mse,
            coverage: acc.coverage(),
            survivors_minority: abs_counts[0],
            survivors_majority: abs_counts[1],
        });
    }
    Ok(AlphaSweepResult { points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeMap;
    use alloc::vec;
    use crate::demographics::Scheme;
    use crate::minority::ImMode;

    #[test]
    fn histogram_counts_and_bins() {
        let h = histogram(&[0.0, 0.0, 1.0], 2).unwrap();
        assert_eq!(h.counts, vec![2, 1]);
        assert_eq!(h.total(), 3);
    }

    #[test]
    fn histogram_single_value_gets_one_bin() {
        let h = histogram(&[0.7], 4).unwrap();
        assert_eq!(h.total(), 1);
        assert_eq!(h.counts.iter().filter(|&&c| c > 0).count(), 1);
    }

    #[test]
    fn histogram_rejects_empty_and_zero_bins() {
        assert_eq!(histogram(&[], 2), Err(EvaluateError::EmptyInput));
        assert_eq!(histogram(&[1.0], 0), Err(EvaluateError::ZeroBins));
    }

    fn groups_two() -> GroupAssignment {
        let labels: BTreeMap<_, _> =
            [(1, GroupLabel::Minority), (2, GroupLabel::Majority)].into_iter().collect();
        GroupAssignment::from_labels(Scheme::Gender, labels)
    }

    #[test]
    fn group_means_average_item_values() {
        let im = ImIndex::from_values(ImMode::Pooled, &[(10, 0.2), (11, 0.4), (12, -0.5)]);
        let lists = vec![(1u32, vec![10, 11]), (2u32, vec![12])];
        let means = group_im_mean(&lists, &im, &groups_two()).unwrap();
        assert!((means.minority - 0.3).abs() < 1e-15);
        assert!((means.majority + 0.5).abs() < 1e-15);
    }

    #[test]
    fn accuracy_error_matches_hand_values() {
        let lists = vec![(1u32, vec![10u32]), (2, vec![11])];
        let heldout = vec![
            RatingTriple { user: 1, item: 10, rating: 4 },
            RatingTriple { user: 2, item: 11, rating: 2 },
        ];
        // perfect predictions
        let r = accuracy_error(&lists, |u, _| Some(if u == 1 { 4.0 } else { 2.0 }), &heldout);
        assert_eq!(r.mse, Some(0.0));
        assert_eq!(r.coverage(), 1.0);
        // single item off by one
        let r = accuracy_error(&lists[..1].to_vec(), |_, _| Some(3.0), &heldout);
        assert_eq!(r.mse, Some(1.0));
    }

    #[test]
    fn accuracy_error_flags_zero_coverage() {
        let lists = vec![(1u32, vec![99u32])];
        let r = accuracy_error(&lists, |_, _| Some(3.0), &[]);
        assert_eq!(r.mse, None);
        assert_eq!(r.covered, 0);
    }

    #[test]
    fn fairness_error_squares_the_distance() {
        // populations span [0,1], so these values survive min-max unchanged
        let um = NormalizedIndex::new([(1u32, 0.7), (2, 0.0), (3, 1.0)]).unwrap();
        let im = NormalizedIndex::new([(10u32, 0.5), (11, 1.0), (12, 0.0)]).unwrap();
        let lists = vec![(1u32, vec![10]), (2, vec![11, 12])];
        let rep = fairness_error(&lists, &um, &im, &groups_two()).unwrap();
        // minority user 1: um' = 0.7, mean im' = 0.5 -> 0.04
        assert!((rep.minority - 0.04).abs() < 1e-15);
        // majority user 2: um' = 0.0, mean im' = 0.5 -> 0.25
        assert!((rep.majority - 0.25).abs() < 1e-15);
    }

    #[test]
    fn fairness_error_zero_when_list_mean_matches_user() {
        let um = NormalizedIndex::new([(1u32, 0.5), (2, 0.0), (3, 1.0)]).unwrap();
        let im = NormalizedIndex::new([(10u32, 0.0), (11, 1.0)]).unwrap();
        let lists = vec![(1u32, vec![10, 11]), (2, vec![10])];
        let rep = fairness_error(&lists, &um, &im, &groups_two()).unwrap();
        assert_eq!(rep.minority, 0.0);
    }

    #[test]
    fn fairness_error_is_order_invariant() {
        let um = NormalizedIndex::new([(1u32, 0.7), (2, 0.2)]).unwrap();
        let im = NormalizedIndex::new([(10u32, 0.1), (11, 0.9), (12, 0.4)]).unwrap();
        let a = vec![(1u32, vec![10, 11, 12]), (2, vec![10])];
        let b = vec![(1u32, vec![12, 10, 11]), (2, vec![10])];
        assert_eq!(
            fairness_error(&a, &um, &im, &groups_two()).unwrap(),
            fairness_error(&b, &um, &im, &groups_two()).unwrap()
        );
    }

    #[test]
    fn normalize_curves_handles_constant_series() {
        let points = vec![
            CurvePoint { x: 0.0, accuracy: 2.0, fairness_minority: 1.0, fairness_majority: 0.1 },
            CurvePoint { x: 1.0, accuracy: 2.0, fairness_minority: 3.0, fairness_majority: 0.4 },
        ];
        let n = normalize_curves(&points);
        assert_eq!(n[0].accuracy, 0.5);
        assert_eq!(n[1].accuracy, 0.5);
        assert_eq!(n[0].fairness_minority, 0.0);
        assert_eq!(n[1].fairness_minority, 1.0);
    }

    #[test]
    fn normalize_curves_preserves_argmin() {
        let points = vec![
            CurvePoint { x: 0.0, accuracy: 5.0, fairness_minority: 0.2, fairness_majority: 0.8 },
            CurvePoint { x: 0.5, accuracy: 1.0, fairness_minority: 0.6, fairness_majority: 0.2 },
            CurvePoint { x: 1.0, accuracy: 3.0, fairness_minority: 0.9, fairness_majority: 0.5 },
        ];
        let n = normalize_curves(&points);
        let argmin = |vals: Vec<f64>| {
            vals.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0
        };
        assert_eq!(
            argmin(points.iter().map(|p| p.accuracy).collect()),
            argmin(n.iter().map(|p| p.accuracy).collect())
        );
        assert_eq!(
            argmin(points.iter().map(|p| p.fairness_minority).collect()),
            argmin(n.iter().map(|p| p.fairness_minority).collect())
        );
    }
}
