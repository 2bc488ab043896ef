//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the `Parallel` execution mode fans work out over
//! rayon's global pool. Without it, both modes run on the calling thread. Every
//! reduction here is order-independent, so results are identical either way.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether work will actually be spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Maps `f` over `0..n` and returns results in index order.
pub fn map_indices<T, F>(n: usize, execution: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if execution.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = execution;
    (0..n).map(f).collect()
}

/// Maps `f` over `items` and folds the results with an associative `reduce`.
pub fn map_reduce<I, T, F, R>(items: &[I], execution: Execution, identity: T, f: F, reduce: R) -> T
where
    I: Sync,
    T: Send + Sync + Clone,
    F: Fn(&I) -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if execution.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(&f).reduce(|| identity.clone(), &reduce);
    }
    let _ = execution;
    items.iter().map(f).fold(identity, reduce)
}

/// Runs two closures, concurrently when parallel execution is enabled.
pub fn join<A, B, FA, FB>(execution: Execution, fa: FA, fb: FB) -> (A, B)
where
    A: Send,
    B: Send,
    FA: FnOnce() -> A + Send,
    FB: FnOnce() -> B + Send,
{
    #[cfg(feature = "parallel")]
    if execution.is_parallel() {
        return rayon::join(fa, fb);
    }
    let _ = execution;
    (fa(), fb())
}
