//! Data-parallel helpers.
//!
//! With the `parallel` feature (on by default) index maps run on the rayon
//! pool; without it they fall back to plain iterators. Results are always
//! collected in index order, so reductions done afterwards are deterministic
//! regardless of the backend.

use std::ops::Range;

/// Below this many items the parallel path is not worth the scheduling cost.
pub const MIN_PARALLEL_LEN: usize = 2048;

/// Sequential index map.
pub fn map_range_seq<T, F>(range: Range<usize>, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    range.map(f).collect()
}

/// Parallel index map (rayon).
#[cfg(feature = "parallel")]
pub fn map_range_par<T, F>(range: Range<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    range.into_par_iter().map(f).collect()
}

/// Index map using the backend selected at compile time.
pub fn map_range<T, F>(range: Range<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if range.len() >= MIN_PARALLEL_LEN {
            return map_range_par(range, f);
        }
    }
    map_range_seq(range, f)
}

/// Map over a slice of independent jobs (parameter sweeps, batches of
/// stencils). Always parallel when the feature is on, whatever the length.
pub fn map_jobs<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Whether the crate was built with the rayon backend.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backends_agree_and_keep_order() {
        let f = |i: usize| (i as f64).sqrt() * 3.0;
        let a = map_range_seq(0..10_000, f);
        let b = map_range(0..10_000, f);
        assert_eq!(a, b);
        let jobs: Vec<usize> = (0..17).collect();
        let c = map_jobs(&jobs, |&i| i * 2);
        assert_eq!(c, (0..17).map(|i| i * 2).collect::<Vec<_>>());
    }
}
