//! Trial-level parallelism.
//!
//! With the `parallel` feature and `workers > 1` trials run on a dedicated
//! rayon pool; otherwise they run in a plain loop. Either way the output is
//! in trial order, so downstream folds see identical input.

/// Apply `f` to `0..count` and collect results in index order.
pub fn map_trials<T, F>(count: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if workers > 1 && count > 1 {
            use rayon::prelude::*;
            match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                Ok(pool) => return pool.install(|| (0..count).into_par_iter().map(&f).collect()),
                Err(_) => return (0..count).map(f).collect(),
            }
        }
    }
    let _ = workers;
    (0..count).map(f).collect()
}

/// Whether this build can run trials concurrently.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

/// Worker count used when the caller asks for "all cores".
pub fn default_workers() -> usize {
    if parallel_enabled() {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let seq = map_trials(100, 1, |k| k * k);
        let par = map_trials(100, 4, |k| k * k);
        assert_eq!(seq, par);
        assert_eq!(seq[7], 49);
    }
}
