//! Execution strategies for data-parallel loops.
//!
//! Hot loops are written once, generic over a [`MapStrategy`]. [`Auto`]
//! runs on rayon when the `parallel` feature is enabled and degrades to a
//! plain iterator otherwise; [`Seq`] always runs sequentially and exists
//! so benches and tests can compare the two paths. Every call site is
//! arranged so the result is independent of the partitioning: maps
//! preserve index order and reductions are exact with deterministic
//! tie-breaks.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub(crate) trait MapStrategy {
    fn map<U, F>(len: usize, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(usize) -> U + Sync + Send;
}

/// Parallel when the `parallel` feature is on, sequential otherwise.
pub(crate) enum Auto {}

impl MapStrategy for Auto {
    #[cfg(feature = "parallel")]
    fn map<U, F>(len: usize, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(usize) -> U + Sync + Send,
    {
        (0..len).into_par_iter().map(f).collect()
    }

    #[cfg(not(feature = "parallel"))]
    fn map<U, F>(len: usize, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(usize) -> U + Sync + Send,
    {
        (0..len).map(f).collect()
    }
}

/// Always sequential.
pub(crate) enum Seq {}

impl MapStrategy for Seq {
    fn map<U, F>(len: usize, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(usize) -> U + Sync + Send,
    {
        (0..len).map(f).collect()
    }
}
