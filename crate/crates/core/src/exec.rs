//! Data-parallel map with a sequential fallback. Results always come back in
//! input order, so reports do not depend on the mode.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Auto,
    Sequential,
    Parallel,
}

impl Mode {
    /// Whether work actually fans out to a thread pool.
    pub fn is_parallel(&self) -> bool {
        cfg!(feature = "parallel") && *self != Mode::Sequential
    }
}

pub fn map<T, R, F>(mode: Mode, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = mode;
    items.iter().map(f).collect()
}

/// `sum_i f(i)` for `i < n`, folded in index order.
pub fn sum_range<R, F, G>(mode: Mode, n: usize, zero: R, f: F, add: G) -> R
where
    R: Send + Sync + Clone,
    F: Fn(usize) -> R + Sync + Send,
    G: Fn(R, R) -> R + Sync + Send,
{
    let idx: Vec<usize> = (0..n).collect();
    map(mode, &idx, |&i| f(i)).into_iter().fold(zero, add)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let v: Vec<u64> = (0..1000).collect();
        let a = map(Mode::Sequential, &v, |x| x * x);
        let b = map(Mode::Parallel, &v, |x| x * x);
        assert_eq!(a, b);
        assert_eq!(sum_range(Mode::Parallel, 10, 0u64, |i| i as u64, |a, b| a + b), 45);
    }
}
