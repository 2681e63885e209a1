//! Pluggable execution of independent work units.
//!
//! Every parallel unit (a chain replica, an annealing trial, a Monte Carlo
//! batch) derives its own [`RngStream`](crate::rng::RngStream) from its index,
//! so an executor only decides *where* units run, never *what* they compute.
//! Results are always returned in index order.

use alloc::vec::Vec;

pub trait Executor: Sync {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs units one after another on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(f).collect()
    }
}

/// Splits `total` into `chunks` nearly equal parts; part `i` gets the extra
/// unit when `i < total % chunks`.
pub fn chunk_len(total: u64, chunks: u64, i: u64) -> u64 {
    total / chunks + u64::from(i < total % chunks)
}
