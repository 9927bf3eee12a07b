//! Execution strategy for data-parallel loops.
//!
//! Every embarrassingly parallel loop in the crate (path-node updates, λ sweeps,
//! candidate endpoints, ε lists) is expressed as an indexed map through
//! [`Exec`]. Without the `parallel` feature, [`Exec::Parallel`] silently runs
//! sequentially, so results never depend on the feature set.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    #[default]
    Parallel,
    Sequential,
}

/// Size the global worker pool. Returns false if the pool already exists or
/// the build has no `parallel` feature.
pub fn init_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        false
    }
}

impl Exec {
    /// Whether this strategy actually uses worker threads in the current build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    pub fn map_range<U, F>(self, n: usize, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(usize) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Apply `f` to each element in place.
    pub fn for_each_mut<T, F>(self, items: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize, &mut T) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            items.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x));
            return;
        }
        items.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64 * 0.1).collect();
        let a = Exec::Parallel.map(&xs, |x| x.sin());
        let b = Exec::Sequential.map(&xs, |x| x.sin());
        assert_eq!(a, b);
        let mut c = xs.clone();
        Exec::Parallel.for_each_mut(&mut c, |i, x| *x += i as f64);
        assert_eq!(c[10], xs[10] + 10.0);
    }
}
