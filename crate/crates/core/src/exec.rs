//! Trial-parallel execution with order-independent results.
//!
//! Work is always split into indexed units and collected back in index
//! order, so every result is identical for any worker count.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::{Error, Result};

#[derive(Clone)]
pub struct Executor {
    pool: Option<Arc<ThreadPool>>,
    workers: usize,
}

impl fmt::Debug for Executor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Executor").field("workers", &self.workers).finish()
    }
}

impl Default for Executor {
    fn default() -> Self {
        Self::sequential()
    }
}

impl Executor {
    pub fn sequential() -> Self {
        Self { pool: None, workers: 1 }
    }

    /// `workers = 0` picks the machine's available parallelism.
    pub fn new(workers: usize) -> Result<Self> {
        let workers = if workers == 0 {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        } else {
            workers
        };
        if workers == 1 {
            return Ok(Self::sequential());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
        Ok(Self { pool: Some(Arc::new(pool)), workers })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Evaluates `f(state, k)` for `k in range`, one scratch state per worker.
    pub fn map_init<S, T, I, F>(&self, range: std::ops::Range<u64>, init: I, f: F) -> Vec<T>
    where
        T: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, u64) -> T + Sync + Send,
    {
        match &self.pool {
            None => {
                let mut state = init();
                range.map(|k| f(&mut state, k)).collect()
            }
            Some(pool) => pool.install(|| range.into_par_iter().map_init(&init, &f).collect()),
        }
    }

    pub fn map<T, F>(&self, range: std::ops::Range<u64>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        self.map_init(range, || (), |_, k| f(k))
    }

    /// Number of `k in range` for which the predicate holds.
    pub fn count<S, I, F>(&self, range: std::ops::Range<u64>, init: I, f: F) -> u64
    where
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, u64) -> bool + Sync + Send,
    {
        self.map_init(range, init, f).into_iter().filter(|&b| b).count() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_do_not_depend_on_workers() {
        let f = |k: u64| (k * 2654435761) % 1000;
        let a = Executor::sequential().map(0..500, f);
        let b = Executor::new(4).unwrap().map(0..500, f);
        assert_eq!(a, b);
        let c = Executor::new(3).unwrap().count(0..500, || 0u8, |_, k| k % 3 == 0);
        assert_eq!(c, 167);
    }
}
