use gibbs_dnls_core::Executor;
use rayon::prelude::*;

use crate::error::Result;

/// Runs per-sample work on a dedicated rayon pool. Results come back in index
/// order, so they never depend on the thread count.
pub struct Parallel {
    pool: rayon::ThreadPool,
}

impl Parallel {
    /// `threads = None` lets rayon pick the number of logical CPUs.
    pub fn new(threads: Option<usize>) -> Result<Self> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(k) = threads {
            builder = builder.num_threads(k);
        }
        Ok(Self {
            pool: builder.build()?,
        })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Parallel {
    fn map_indices<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool
            .install(|| (0..count).into_par_iter().map(f).collect())
    }
}
