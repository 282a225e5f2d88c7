//! Sparse rating storage with dense internal indexing.
//!
//! Raw dataset ids are kept as-is at the API surface; internally users and
//! items get dense contiguous indexes so factor matrices can be plain
//! row-major buffers. "Not voted" is represented by absence and is never
//! conflated with a zero rating.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

/// Raw user id as it appears in the source dataset.
pub type UserId = u32;
/// Raw item id as it appears in the source dataset.
pub type ItemId = u32;

/// One rating expressed with raw ids, used for split outputs and held-out sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct RatingTriple {
    pub user: UserId,
    pub item: ItemId,
    pub rating: u8,
}

/// Bidirectional raw id <-> dense index mapping.
///
/// Dense indexes are assigned in first-seen order, which keeps them stable
/// for a given input stream.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdMap {
    to_raw: Vec<u32>,
    to_dense: BTreeMap<u32, u32>,
}

impl IdMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Dense index for `raw`, inserting it if unseen.
    pub fn intern(&mut self, raw: u32) -> u32 {
        if let Some(&d) = self.to_dense.get(&raw) {
            return d;
        }
        let d = self.to_raw.len() as u32;
        self.to_raw.push(raw);
        self.to_dense.insert(raw, d);
        d
    }

    pub fn dense(&self, raw: u32) -> Option<u32> {
        self.to_dense.get(&raw).copied()
    }

    pub fn raw(&self, dense: u32) -> Option<u32> {
        self.to_raw.get(dense as usize).copied()
    }

    pub fn len(&self) -> usize {
        self.to_raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.to_raw.is_empty()
    }

    /// Raw ids in dense-index order.
    pub fn raw_ids(&self) -> &[u32] {
        &self.to_raw
    }

    /// Rebuilds a map from raw ids in dense order; `None` on duplicates.
    pub fn from_raw_ids(ids: impl IntoIterator<Item = u32>) -> Option<Self> {
        let mut map = Self::new();
        let mut count = 0usize;
        for raw in ids {
            map.intern(raw);
            count += 1;
        }
        (map.to_raw.len() == count).then_some(map)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RatingError {
    OutOfRange { user: UserId, item: ItemId, rating: u8, max: u8 },
    Duplicate { user: UserId, item: ItemId },
    ZeroMaxRating,
}

impl fmt::Display for RatingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatingError::OutOfRange { user, item, rating, max } => write!(
                f,
                "rating {rating} for (user {user}, item {item}) outside 1..={max}"
            ),
            RatingError::Duplicate { user, item } => {
                write!(f, "duplicate rating for (user {user}, item {item})")
            }
            RatingError::ZeroMaxRating => write!(f, "maximum rating must be at least 1"),
        }
    }
}

impl core::error::Error for RatingError {}

/// Accumulates ratings before freezing them into a [`RatingMatrix`].
#[derive(Debug, Clone)]
pub struct RatingMatrixBuilder {
    max_rating: u8,
    users: IdMap,
    items: IdMap,
    // (dense user, dense item, rating) in insertion order
    entries: Vec<(u32, u32, u8)>,
    seen: BTreeMap<(u32, u32), ()>,
}

impl RatingMatrixBuilder {
    pub fn new(max_rating: u8) -> Self {
        Self {
            max_rating,
            users: IdMap::new(),
            items: IdMap::new(),
            entries: Vec::new(),
            seen: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, user: UserId, item: ItemId, rating: u8) -> Result<(), RatingError> {
        if self.max_rating == 0 {
            return Err(RatingError::ZeroMaxRating);
        }
        if rating < 1 || rating > self.max_rating {
            return Err(RatingError::OutOfRange { user, item, rating, max: self.max_rating });
        }
        let du = self.users.intern(user);
        let di = self.items.intern(item);
        if self.seen.insert((du, di), ()).is_some() {
            return Err(RatingError::Duplicate { user, item });
        }
        self.entries.push((du, di, rating));
        Ok(())
    }

    pub fn build(self) -> RatingMatrix {
        RatingMatrix::from_dense_entries(self.max_rating, self.users, self.items, self.entries)
    }
}

/// Sparse user-by-item rating matrix.
///
/// Entries are stored once, sorted by (dense user, dense item), with CSR-style
/// offsets for per-user slices and a per-item posting list for column scans.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingMatrix {
    max_rating: u8,
    users: IdMap,
    items: IdMap,
    entries: Vec<(u32, u32, u8)>,
    user_offsets: Vec<usize>,           // len = num_users + 1
    item_postings: Vec<(u32, u8)>,      // (dense user, rating) grouped by item
    item_offsets: Vec<usize>,           // len = num_items + 1
}

impl RatingMatrix {
    /// Builds from already-densified entries. Entries may arrive in any order.
    fn from_dense_entries(
        max_rating: u8,
        users: IdMap,
        items: IdMap,
        mut entries: Vec<(u32, u32, u8)>,
    ) -> Self {
        entries.sort_unstable_by_key(|&(u, i, _)| (u, i));
        let num_users = users.len();
        let num_items = items.len();

        let mut user_offsets = Vec::with_capacity(num_users + 1);
        user_offsets.push(0);
        {
            let mut pos = 0usize;
            for u in 0..num_users as u32 {
                while pos < entries.len() && entries[pos].0 == u {
                    pos += 1;
                }
                user_offsets.push(pos);
            }
        }

        let mut item_counts = alloc::vec![0usize; num_items];
        for &(_, i, _) in &entries {
            item_counts[i as usize] += 1;
        }
        let mut item_offsets = Vec::with_capacity(num_items + 1);
        let mut acc = 0usize;
        item_offsets.push(0);
        for c in &item_counts {
            acc += c;
            item_offsets.push(acc);
        }
        let mut cursor = item_offsets.clone();
        let mut item_postings = alloc::vec![(0u32, 0u8); entries.len()];
        for &(u, i, r) in &entries {
            let slot = cursor[i as usize];
            item_postings[slot] = (u, r);
            cursor[i as usize] += 1;
        }

        Self { max_rating, users, items, entries, user_offsets, item_postings, item_offsets }
    }

    /// Rebuilds a matrix from its dense parts, validating ranges and
    /// duplicates. Counterpart of [`Self::dense_entries`] for persistence.
    pub fn from_dense_parts(
        max_rating: u8,
        users: IdMap,
        items: IdMap,
        entries: Vec<(u32, u32, u8)>,
    ) -> Result<Self, RatingError> {
        let mut seen = BTreeMap::new();
        for &(du, di, r) in &entries {
            let user = users.raw(du).ok_or(RatingError::OutOfRange {
                user: du,
                item: di,
                rating: r,
                max: max_rating,
            })?;
            let item = items.raw(di).ok_or(RatingError::OutOfRange {
                user,
                item: di,
                rating: r,
                max: max_rating,
            })?;
            if r < 1 || r > max_rating {
                return Err(RatingError::OutOfRange { user, item, rating: r, max: max_rating });
            }
            if seen.insert((du, di), ()).is_some() {
                return Err(RatingError::Duplicate { user, item });
            }
        }
        Ok(Self::from_dense_entries(max_rating, users, items, entries))
    }

    /// Builds a matrix over an explicit id universe from raw-id triples.
    ///
    /// Used to materialize split subsets that must keep the parent's dense
    /// indexing even when a user or item ends up with no entries.
    pub fn from_triples_with_maps(
        max_rating: u8,
        users: IdMap,
        items: IdMap,
        triples: &[RatingTriple],
    ) -> Result<Self, RatingError> {
        let mut entries = Vec::with_capacity(triples.len());
        let mut seen = BTreeMap::new();
        for t in triples {
            if t.rating < 1 || t.rating > max_rating {
                return Err(RatingError::OutOfRange {
                    user: t.user,
                    item: t.item,
                    rating: t.rating,
                    max: max_rating,
                });
            }
            let du = users
                .dense(t.user)
                .expect("triple user must belong to the provided id universe");
            let di = items
                .dense(t.item)
                .expect("triple item must belong to the provided id universe");
            if seen.insert((du, di), ()).is_some() {
                return Err(RatingError::Duplicate { user: t.user, item: t.item });
            }
            entries.push((du, di, t.rating));
        }
        Ok(Self::from_dense_entries(max_rating, users, items, entries))
    }

    pub fn max_rating(&self) -> u8 {
        self.max_rating
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_items(&self) -> usize {
        self.items.len()
    }

    pub fn num_entries(&self) -> usize {
        self.entries.len()
    }

    pub fn users(&self) -> &IdMap {
        &self.users
    }

    pub fn items(&self) -> &IdMap {
        &self.items
    }

    /// Rating for raw (user, item), or `None` when not voted.
    pub fn rating(&self, user: UserId, item: ItemId) -> Option<u8> {
        let du = self.users.dense(user)?;
        let di = self.items.dense(item)?;
        self.rating_dense(du, di)
    }

    /// Rating for dense (user, item), or `None` when not voted.
    pub fn rating_dense(&self, user: u32, item: u32) -> Option<u8> {
        let row = self.user_row(user)?;
        row.binary_search_by_key(&item, |&(_, i, _)| i)
            .ok()
            .map(|pos| row[pos].2)
    }

    fn user_row(&self, user: u32) -> Option<&[(u32, u32, u8)]> {
        let u = user as usize;
        if u + 1 >= self.user_offsets.len() {
            return None;
        }
        Some(&self.entries[self.user_offsets[u]..self.user_offsets[u + 1]])
    }

    /// (dense item, rating) pairs voted by a dense user, item-sorted.
    pub fn votes_by_user(&self, user: u32) -> impl Iterator<Item = (u32, u8)> + '_ {
        self.user_row(user)
            .unwrap_or(&[])
            .iter()
            .map(|&(_, i, r)| (i, r))
    }

    /// (dense user, rating) pairs cast on a dense item.
    pub fn votes_on_item(&self, item: u32) -> &[(u32, u8)] {
        let i = item as usize;
        if i + 1 >= self.item_offsets.len() {
            return &[];
        }
        &self.item_postings[self.item_offsets[i]..self.item_offsets[i + 1]]
    }

    pub fn vote_count_of_user(&self, user: u32) -> usize {
        self.user_row(user).map_or(0, |r| r.len())
    }

    /// All entries as (dense user, dense item, rating), sorted by (user, item).
    pub fn dense_entries(&self) -> &[(u32, u32, u8)] {
        &self.entries
    }

    /// All entries as raw-id triples, in dense (user, item) order.
    pub fn triples(&self) -> impl Iterator<Item = RatingTriple> + '_ {
        self.entries.iter().map(move |&(u, i, r)| RatingTriple {
            user: self.users.raw(u).expect("dense user in range"),
            item: self.items.raw(i).expect("dense item in range"),
            rating: r,
        })
    }

    /// New matrix over the same id universe containing only `keep` entries.
    pub fn subset(&self, keep: impl Fn(usize) -> bool) -> Self {
        let entries: Vec<_> = self
            .entries
            .iter()
            .enumerate()
            .filter(|(idx, _)| keep(*idx))
            .map(|(_, &e)| e)
            .collect();
        Self::from_dense_entries(self.max_rating, self.users.clone(), self.items.clone(), entries)
    }
}
