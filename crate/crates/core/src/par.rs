//! Data-parallel helpers with a sequential fallback when the `parallel`
//! feature is disabled.

/// Maps `f` over `items`, preserving order.
#[cfg(feature = "parallel")]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Strictly sequential variant of [`map`], used by benches as the baseline.
pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Runs `op` with at most `jobs` worker threads. `None` uses the global pool.
#[cfg(feature = "parallel")]
pub fn with_jobs<R: Send>(jobs: Option<usize>, op: impl FnOnce() -> R + Send) -> R {
    match jobs {
        Some(j) if j > 0 => match rayon::ThreadPoolBuilder::new().num_threads(j).build() {
            Ok(pool) => pool.install(op),
            Err(err) => {
                log::warn!("could not build a {j}-thread pool ({err}); using the global pool");
                op()
            }
        },
        _ => op(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_jobs<R: Send>(_jobs: Option<usize>, op: impl FnOnce() -> R + Send) -> R {
    op()
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    #[test]
    fn map_preserves_order() {
        let items: Vec<u32> = (0..100).collect();
        assert_eq!(super::map(&items, |x| x * 2), super::map_sequential(&items, |x| x * 2));
        assert_eq!(super::with_jobs(Some(2), || super::map(&items, |x| x + 1))[99], 100);
    }
}
