//! Worker pool used by the grid and pair loops.
//!
//! Every parallel loop maps an index to a self-contained result and collects
//! in index order, so output never depends on the worker count.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{invalid, Result};

#[derive(Clone, Default)]
pub struct Workers {
    pool: Option<Arc<rayon::ThreadPool>>,
}

impl std::fmt::Debug for Workers {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Workers").field("count", &self.count()).finish()
    }
}

impl Workers {
    /// Single-threaded execution.
    pub fn sequential() -> Self {
        Self { pool: None }
    }

    pub fn new(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(invalid("workers must be at least 1"));
        }
        if count == 1 {
            return Ok(Self::sequential());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(count)
            .build()
            .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?;
        Ok(Self {
            pool: Some(Arc::new(pool)),
        })
    }

    pub fn count(&self) -> usize {
        self.pool.as_ref().map_or(1, |p| p.current_num_threads())
    }

    /// Maps `f` over `0..n`, results in index order.
    pub fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match &self.pool {
            None => (0..n).map(f).collect(),
            Some(pool) => pool.install(|| (0..n).into_par_iter().map(f).collect()),
        }
    }

    /// Like [`Workers::map`] with a per-job scratch value built by `init`.
    pub fn map_with_scratch<S, T, I, F>(&self, n: usize, init: I, f: F) -> Vec<T>
    where
        T: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, usize) -> T + Sync + Send,
    {
        match &self.pool {
            None => {
                let mut scratch = init();
                (0..n).map(|i| f(&mut scratch, i)).collect()
            }
            Some(pool) => pool.install(|| {
                (0..n)
                    .into_par_iter()
                    .map_init(&init, |s, i| f(s, i))
                    .collect()
            }),
        }
    }

    pub fn try_map<T, F>(&self, n: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync + Send,
    {
        self.map(n, f).into_iter().collect()
    }
}
