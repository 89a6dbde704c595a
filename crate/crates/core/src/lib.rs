//! Braid group actions on n-adic integers, computed by lifting loops through
//! the map that sends a polynomial to its set of critical values.
//!
//! Conventions used throughout:
//! - braid words are read left to right as path concatenation;
//! - permutations compose left to right (`a.then(&b)` applies `a` first);
//! - fiber labels and permutation points are 0-indexed.

pub mod action;
pub mod braid;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod fiber;
pub mod invariants;
pub mod lift;
pub mod poly;
pub mod realalg;
pub mod reference;
pub mod verify;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
