//! Order-preserving parallel map.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// `(0..n).map(f)` evaluated on up to `jobs` threads. Results come back in
/// index order, so output never depends on `jobs`.
pub fn map_indexed<T, F>(jobs: usize, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    if jobs <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(&f).collect())
}
