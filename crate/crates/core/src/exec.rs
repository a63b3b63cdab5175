//! Execution strategy for the data-parallel loops (path sums, tensor
//! contractions, time grids, parameter sweeps).
//!
//! Work is always split into the same index chunks and partial results are
//! combined in index order, so both strategies produce bit-identical output.
//! Without the `parallel` feature `Strategy::Parallel` runs sequentially.

use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    Sequential,
    #[default]
    Parallel,
}

impl Strategy {
    /// True when this strategy will actually fan out to worker threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Strategy::Parallel
    }
}

/// Maps `f` over `0..n` split into chunks of at most `chunk` indices and
/// returns the per-chunk results in chunk order.
pub(crate) fn map_chunks<T, F>(strategy: Strategy, n: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync + Send,
{
    let chunk = chunk.max(1);
    let n_chunks = n.div_ceil(chunk);
    let range_of = |c: usize| c * chunk..((c + 1) * chunk).min(n);

    #[cfg(feature = "parallel")]
    if strategy.is_parallel() && n_chunks > 1 {
        use rayon::prelude::*;
        return (0..n_chunks)
            .into_par_iter()
            .map(|c| f(range_of(c)))
            .collect();
    }
    let _ = strategy;
    (0..n_chunks).map(|c| f(range_of(c))).collect()
}

/// Maps `f` over a slice of inputs, preserving order.
pub(crate) fn map_items<I, T, F>(strategy: Strategy, items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if strategy.is_parallel() && items.len() > 1 {
        use rayon::prelude::*;
        return items.par_iter().map(&f).collect();
    }
    let _ = strategy;
    items.iter().map(f).collect()
}

/// Fills `out[i] = f(i)` for every index.
pub(crate) fn fill_indexed<T, F>(strategy: Strategy, out: &mut [T], min_parallel: usize, f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if strategy.is_parallel() && out.len() >= min_parallel {
        use rayon::prelude::*;
        out.par_iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
        return;
    }
    let _ = (strategy, min_parallel);
    for (i, o) in out.iter_mut().enumerate() {
        *o = f(i);
    }
}
