//! Per-point work distribution.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    /// Data-parallel over sample points (falls back to sequential without the `parallel` feature).
    #[default]
    Parallel,
    Sequential,
}

/// Applies `f` to every point, preserving order.
pub fn map_points<T, F>(points: &[Vec<f64>], exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[f64]) -> T + Send + Sync,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            points.par_iter().map(|p| f(p)).collect()
        }
        _ => points.iter().map(|p| f(p)).collect(),
    }
}
