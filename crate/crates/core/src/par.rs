//! Execution strategy for data-parallel sweeps.
//!
//! Every sweep in the crate (θ grids, norm rows, weight ranges) is written
//! once against these helpers. `Execution::Parallel` dispatches to rayon when
//! the `parallel` feature is enabled and silently degrades to the sequential
//! path otherwise, so results never depend on the build configuration beyond
//! reduction-order rounding.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this build can actually run in parallel.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }

    /// The strategy that will really be used.
    pub fn effective(self) -> Execution {
        if Self::parallel_available() {
            self
        } else {
            Execution::Sequential
        }
    }
}

/// Ordered map over a slice. Output order always matches input order.
pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec.effective() {
        #[cfg(feature = "parallel")]
        Execution::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

/// Ordered map over an index range.
pub fn map_range<R, F>(exec: Execution, range: std::ops::Range<usize>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match exec.effective() {
        #[cfg(feature = "parallel")]
        Execution::Parallel => range.into_par_iter().map(f).collect(),
        _ => range.map(f).collect(),
    }
}
