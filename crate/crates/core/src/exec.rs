//! Data-parallel helpers with a sequential fallback.
//!
//! Every batch loop in the crate goes through [`Execution`], so the same call
//! site runs on the rayon pool when the `parallel` feature is enabled and as a
//! plain iterator otherwise. Results are always returned in input order, and
//! reductions use an associative, total tie-break, so output never depends on
//! the schedule.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Loops shorter than this stay sequential even in parallel mode.
const MIN_PARALLEL_LEN: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
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

    fn split(self, len: usize) -> bool {
        self.is_parallel() && len >= MIN_PARALLEL_LEN
    }

    /// `(0..len).map(f).collect()`, possibly in parallel.
    pub fn map_range<R, F>(self, len: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.split(len) {
            return (0..len).into_par_iter().map(f).collect();
        }
        (0..len).map(f).collect()
    }

    /// Like [`Execution::map_range`] but ignores the small-input cutoff; for
    /// coarse tasks such as whole training runs.
    pub fn map_tasks<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Maps `0..len` and keeps the best value under `better(a, b)` ("a beats b").
    /// `better` must be a strict total preference for the result to be
    /// schedule independent.
    pub fn best_of<R, F, B>(self, len: usize, f: F, better: B) -> Option<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
        B: Fn(&R, &R) -> bool + Sync + Send,
    {
        let pick = |a: R, b: R| if better(&b, &a) { b } else { a };
        #[cfg(feature = "parallel")]
        if self.split(len) {
            return (0..len).into_par_iter().map(f).reduce_with(pick);
        }
        (0..len).map(f).reduce(pick)
    }

    /// Runs `f` inside a pool limited to `jobs` threads. `jobs == 0` uses the
    /// global pool. Without the `parallel` feature this just calls `f`.
    pub fn with_jobs<R: Send>(jobs: usize, f: impl FnOnce() -> R + Send) -> R {
        #[cfg(feature = "parallel")]
        if jobs > 0 {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
                return pool.install(f);
            }
        }
        let _ = jobs;
        f()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_range_preserves_order() {
        for exec in [Execution::Sequential, Execution::Parallel] {
            let out = exec.map_range(1000, |i| i * 2);
            assert_eq!(out, (0..1000).map(|i| i * 2).collect::<Vec<_>>());
        }
    }

    #[test]
    fn best_of_is_schedule_independent() {
        // many equal maxima; tie-break on lowest index
        let key = |i: usize| (i % 7, i);
        let better = |a: &(usize, usize), b: &(usize, usize)| a.0 > b.0 || (a.0 == b.0 && a.1 < b.1);
        let seq = Execution::Sequential.best_of(5000, key, better);
        let par = Execution::Parallel.best_of(5000, key, better);
        assert_eq!(seq, Some((6, 6)));
        assert_eq!(seq, par);
    }
}
