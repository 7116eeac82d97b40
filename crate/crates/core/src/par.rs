//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the work is spread over the rayon pool; without
//! it, or when [`Execution::Sequential`] is requested, the same closures run on
//! the calling thread. Results never depend on the execution mode: maxima are
//! exact comparisons with ties resolved by the smallest index.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many items the parallel path is not worth the scheduling cost.
pub const PARALLEL_MIN_LEN: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    fn parallel_for(self, len: usize, min_len: usize) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel && len >= min_len
    }
}

/// Keeps the larger value; on equal values keeps the smaller index.
fn better(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// Index of the maximum of `f(0..len)`, first index on ties. `None` when `len == 0`.
///
/// NaN values never win a comparison.
pub fn argmax<F>(exec: Execution, len: usize, f: F) -> Option<(f64, usize)>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    if len == 0 {
        return None;
    }
    if exec.parallel_for(len, PARALLEL_MIN_LEN) {
        #[cfg(feature = "parallel")]
        {
            return Some(
                (0..len)
                    .into_par_iter()
                    .with_min_len(PARALLEL_MIN_LEN / 4)
                    .map(|i| (f(i), i))
                    .reduce(|| (f64::NEG_INFINITY, usize::MAX), better),
            )
            .map(|(v, i)| if i == usize::MAX { (f(0), 0) } else { (v, i) });
        }
    }
    let mut best = (f(0), 0);
    for i in 1..len {
        best = better(best, (f(i), i));
    }
    Some(best)
}

/// `f(0..len)` collected in index order.
pub fn map_indexed<T, F>(exec: Execution, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if exec.parallel_for(len, 2) {
        #[cfg(feature = "parallel")]
        {
            return (0..len).into_par_iter().map(f).collect();
        }
    }
    (0..len).map(f).collect()
}

/// Runs `f` with the parallel helpers capped at `threads` workers.
///
/// Falls back to running `f` directly when the feature is off or the pool
/// cannot be built.
pub fn with_thread_cap<R, F>(threads: Option<usize>, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        if let Some(n) = threads.filter(|&n| n > 0) {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                return pool.install(f);
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    f()
}
