//! The five-user, four-item worked example and random instance generators.

use std::collections::BTreeMap;

use fairrec_core::demographics::{GroupAssignment, GroupLabel, Scheme};
use fairrec_core::minority::ThresholdConfig;
use fairrec_core::ratings::{RatingMatrix, RatingMatrixBuilder};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Users 1, 2, 5 are male (majority); users 3, 4 female (minority).
/// Items 1..=4 are the toy's a..d.
pub const TOY_RATINGS: [(u32, u32, u8); 19] = [
    (1, 1, 5), (1, 2, 2), (1, 4, 4),
    (2, 1, 5), (2, 2, 2), (2, 3, 4), (2, 4, 2),
    (3, 1, 2), (3, 2, 4), (3, 3, 1), (3, 4, 4),
    (4, 1, 1), (4, 2, 5), (4, 3, 4), (4, 4, 5),
    (5, 1, 4), (5, 2, 1), (5, 3, 4), (5, 4, 2),
];

pub fn toy_matrix() -> RatingMatrix {
    let mut b = RatingMatrixBuilder::new(5);
    for (u, i, r) in TOY_RATINGS {
        b.add(u, i, r).unwrap();
    }
    b.build()
}

pub fn toy_groups() -> GroupAssignment {
    let labels: BTreeMap<u32, GroupLabel> = [
        (1, GroupLabel::Majority),
        (2, GroupLabel::Majority),
        (3, GroupLabel::Minority),
        (4, GroupLabel::Minority),
        (5, GroupLabel::Majority),
    ]
    .into_iter()
    .collect();
    GroupAssignment::from_labels(Scheme::Gender, labels)
}

/// Like at 4, dislike at 2, no minimum-votes rule (the toy setting).
pub fn toy_thresholds() -> ThresholdConfig {
    ThresholdConfig::new(4, 2, 0)
}

/// Random dense-ish rating matrix plus a label assignment guaranteed to have
/// both groups, for oracle-equivalence trials.
pub fn random_instance(
    rng: &mut ChaCha8Rng,
    max_users: usize,
    max_items: usize,
) -> (RatingMatrix, GroupAssignment) {
    let users = rng.gen_range(2..=max_users.max(2));
    let items = rng.gen_range(1..=max_items.max(1));
    let mut b = RatingMatrixBuilder::new(5);
    // make sure every user votes at least once so ids exist
    for u in 1..=users as u32 {
        let i = rng.gen_range(1..=items as u32);
        b.add(u, i, rng.gen_range(1..=5)).unwrap();
        for item in 1..=items as u32 {
            if item != i && rng.gen_bool(0.55) {
                b.add(u, item, rng.gen_range(1..=5)).unwrap();
            }
        }
    }
    let mut labels: BTreeMap<u32, GroupLabel> = (1..=users as u32)
        .map(|u| {
            let l = if rng.gen_bool(0.4) { GroupLabel::Minority } else { GroupLabel::Majority };
            (u, l)
        })
        .collect();
    labels.insert(1, GroupLabel::Minority);
    labels.insert(users as u32, GroupLabel::Majority);
    (b.build(), GroupAssignment::from_labels(Scheme::Gender, labels))
}
