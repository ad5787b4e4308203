//! Rayon-backed executor for the compute drivers.

use rayon::prelude::*;
use vorres_core::exec::Executor;

use crate::error::{Error, Result};

/// Environment variable capping worker threads (0 or unset means one per
/// available core).
pub const THREADS_ENV: &str = "VORRES_THREADS";

/// Runs indexed jobs on a dedicated thread pool. Results are collected in
/// index order, so output does not depend on the thread count.
pub struct RayonExecutor {
    pool: rayon::ThreadPool,
}

impl RayonExecutor {
    /// A pool with `threads` workers; 0 picks the rayon default.
    pub fn new(threads: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Data(format!("cannot start thread pool: {e}")))?;
        Ok(Self { pool })
    }

    /// A pool sized from `VORRES_THREADS`.
    pub fn from_env() -> Result<Self> {
        Self::new(threads_from_env()?)
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

/// Reads `VORRES_THREADS`, treating unset or empty as 0.
pub fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v.trim().parse().map_err(|_| {
            Error::Usage(format!("{THREADS_ENV} must be a non-negative integer, got `{v}`"))
        }),
        _ => Ok(0),
    }
}

impl Executor for RayonExecutor {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}
