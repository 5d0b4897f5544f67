//! Trial-level data parallelism.
//!
//! With the `parallel` feature (on by default) trials are spread over the
//! rayon pool; without it every [`Execution`] runs sequentially. Outputs are
//! always collected in trial order, so downstream reductions are identical
//! under both paths.

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
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

/// Runs `trial(t)` for `t` in `0..trials` and returns the outputs in trial
/// order. The first error (in the order rayon observes it) aborts the run.
pub fn try_map_trials<T, F>(trials: u64, exec: Execution, trial: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..trials).into_par_iter().map(trial).collect()
        }
        _ => (0..trials).map(trial).collect(),
    }
}

/// Infallible variant of [`try_map_trials`].
pub fn map_trials<T, F>(trials: u64, exec: Execution, trial: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..trials).into_par_iter().map(trial).collect()
        }
        _ => (0..trials).map(trial).collect(),
    }
}
