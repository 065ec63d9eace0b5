//! Ensemble evaluation, parallel when the `parallel` feature is on.
//!
//! Per-path work is a pure function of the path index, so the only
//! determinism requirement is that results come back in index order;
//! `collect` on an indexed parallel iterator guarantees that. Reductions over
//! the returned vector are then performed sequentially by the callers, which
//! keeps every aggregate bit-identical across worker counts.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluate f over path indices 0..n, in index order.
#[cfg(feature = "parallel")]
pub fn map_paths<T, F>(n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Evaluate f over path indices 0..n, in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_paths<T, F>(n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Sequential ensemble evaluation regardless of features; the benchmark
/// baseline and the reference for worker-independence checks.
pub fn map_paths_seq<T, F>(n: u64, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    (0..n).map(f).collect()
}
