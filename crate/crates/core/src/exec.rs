//! Sample-level parallelism hook.
//!
//! Monte Carlo drivers in this crate evaluate `f(i)` for every stream index
//! `i` and reduce the results in index order. An [`Executor`] only decides
//! how the per-index evaluations are scheduled, so the reduced result never
//! depends on the executor or its thread count.

use alloc::vec::Vec;

pub trait Executor: Sync {
    /// Returns `[f(0), f(1), ..., f(count - 1)]`.
    fn map_indices<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs every index on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_indices<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(f).collect()
    }
}
