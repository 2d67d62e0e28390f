//! Data-parallel helpers. With the `parallel` feature the `Parallel` mode runs on
//! rayon; without it, or in `Sequential` mode, everything runs on the caller's
//! thread. Results are always returned in input order.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Parallel,
    Sequential,
}

impl Mode {
    /// True when work will actually be spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Mode::Parallel
    }
}

pub fn map<T, R, F>(mode: Mode, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() && items.len() > 1 {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = mode;
    items.iter().map(f).collect()
}

/// Map each item then fold the partial results with `merge`.
pub fn map_reduce<T, R, F, M>(mode: Mode, items: &[T], identity: impl Fn() -> R + Sync + Send, f: F, merge: M) -> R
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
    M: Fn(R, R) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() && items.len() > 1 {
        use rayon::prelude::*;
        return items.par_iter().map(f).reduce(identity, merge);
    }
    let _ = mode;
    items.iter().map(f).fold(identity(), merge)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = map(Mode::Parallel, &xs, |x| x * x);
        let b = map(Mode::Sequential, &xs, |x| x * x);
        assert_eq!(a, b);
        let s1 = map_reduce(Mode::Parallel, &xs, || 0, |x| *x, |a, b| a + b);
        let s2 = map_reduce(Mode::Sequential, &xs, || 0, |x| *x, |a, b| a + b);
        assert_eq!(s1, s2);
    }
}
