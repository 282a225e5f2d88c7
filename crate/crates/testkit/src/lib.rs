//! Test support shared across the workspace: the worked five-user data toy,
//! brute-force re-implementations of the index definitions, exhaustive
//! ranking oracles, finite-difference gradients, random instance generators
//! and a seeded synthetic dataset with a built-in demographic bias.
//!
//! The oracles here deliberately re-derive everything from first principles
//! (explicit set enumeration, full sorts, loss probes) so they share no code
//! path with the implementations they check.

pub mod fixtures;
pub mod gradcheck;
pub mod oracle;
pub mod synth;

pub use fixtures::{toy_groups, toy_matrix, toy_thresholds};
