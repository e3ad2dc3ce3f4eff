//! Order-preserving data-parallel map. With the `parallel` feature the work
//! is spread over the rayon pool; without it everything runs inline.

use crate::error::Result;

/// Execution mode for batch work (paths, grid scans).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

impl Execution {
    /// Whether work will actually run on several threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// `(0..n).map(f)` collected in index order.
pub fn map_indexed<T, F>(n: usize, mode: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode == Execution::Parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..n).map(f).collect()
}

/// Fallible variant of [`map_indexed`]; the first error in index order wins.
pub fn try_map_indexed<T, F>(n: usize, mode: Execution, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    map_indexed(n, mode, f).into_iter().collect()
}
