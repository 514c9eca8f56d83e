//! Universal words and universal d-dimensional arrays.
//!
//! A word over `[q]` is *k-universal* when it contains every word of length
//! `k` as a subsequence; a d-array is k-universal when it contains every
//! d-array of order `k` as a subarray. This crate provides exact checks with
//! constructive witnesses, minimal constructions, log-space evaluation of
//! the counting and second-moment quantities for random arrays, seeded Monte
//! Carlo experiments, and the permutation-pattern analogues.
//!
//! Symbols are the integers `1..=q` everywhere in the public API, and all
//! positions and coordinates are 1-based.

pub mod bounds;
pub mod cli;
pub mod darray;
mod error;
pub mod output;
pub mod permutations;
pub mod random;
pub mod words;

pub use error::{Error, Result};
pub use words::{Alphabet, Word};

/// Hard cap on the number of targets or candidates any exhaustive
/// enumeration will visit.
pub const ENUMERATION_LIMIT: u64 = 10_000_000;
