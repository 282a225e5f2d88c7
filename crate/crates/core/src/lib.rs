//! Fairness-aware collaborative filtering primitives.
//!
//! The crate covers the full modelling chain: sparse rating storage and
//! deterministic splits, item/user minority indexes with their `[0,1]`
//! normalizations, matrix factorization trained by SGD, a small
//! loss-predicting network with a fairness/accuracy balance input, the
//! demographic-filtered heuristic recommender, the demographic-free ranked
//! recommender, and the evaluation metrics (classification tables, group
//! index means, error curves, beta sweeps).
//!
//! Everything here is pure compute: no IO, no global state, all randomness
//! from caller-provided seeds. The crate builds without `std` (alloc
//! required); file formats, parsing and the CLI live in the companion
//! `fairrec` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod demographics;
pub mod evaluate;
pub mod heuristic;
pub mod minority;
pub mod mln;
pub mod pmf;
pub mod ratings;
pub mod recommend;
pub mod split;

mod fmath;

pub use demographics::{AgeCode, DemographicTable, Gender, GroupAssignment, GroupLabel, Scheme};
pub use minority::{ImIndex, ImMode, NormalizedIndex, ThresholdConfig, UmIndex, UmMode};
pub use pmf::FactorModel;
pub use ratings::{IdMap, ItemId, RatingMatrix, RatingTriple, UserId};
