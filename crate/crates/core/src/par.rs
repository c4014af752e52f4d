//! Ordered map over replicate indices.
//!
//! Results always come back in index order, so any reduction done
//! afterwards is identical for serial and parallel schedules.

/// Evaluate `f(0), ..., f(count - 1)`, in parallel when requested and the
/// `parallel` feature is enabled.
pub fn map_indexed<T, F>(count: u64, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return (0..count).into_par_iter().map(f).collect();
    }
    let _ = parallel;
    (0..count).map(f).collect()
}

/// Like [`map_indexed`] for fallible tasks; the first error in index order wins.
pub fn try_map_indexed<T, E, F>(count: u64, parallel: bool, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64) -> Result<T, E> + Sync + Send,
{
    map_indexed(count, parallel, f).into_iter().collect()
}
