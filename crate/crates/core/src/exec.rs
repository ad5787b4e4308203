//! Replicate-level execution.
//!
//! Compute drivers take an [`Executor`] and hand it independent, indexed
//! jobs. Results always come back in index order, so a parallel executor
//! and [`Sequential`] produce identical output.

use alloc::vec::Vec;

pub trait Executor: Sync {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}
