//! Data-parallel maps with a sequential fallback.
//!
//! Results always come back in index order, and every reduction in the crate
//! runs over the collected vector in ascending index order, so outputs are
//! bit-identical whichever path executes.

/// How a batch of independent evaluations is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is enabled and falls
    /// back to sequential execution otherwise.
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Below this many items the automatic path stays sequential.
const AUTO_THRESHOLD: usize = 64;

/// Maps `f` over `0..n` and collects in index order.
pub fn map_indexed<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Like [`map_indexed`], choosing the parallel path only for batches large
/// enough to amortize scheduling.
pub(crate) fn map_auto<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let exec = if n >= AUTO_THRESHOLD {
        Execution::Parallel
    } else {
        Execution::Sequential
    };
    map_indexed(exec, n, f)
}

/// Collects a vector of results, stopping at the first error in index order.
pub(crate) fn collect_ordered<T, E>(items: Vec<Result<T, E>>) -> Result<Vec<T>, E> {
    items.into_iter().collect()
}
