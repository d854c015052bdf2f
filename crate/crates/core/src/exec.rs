//! Sequential/parallel execution of the data-parallel inner loops.
//!
//! Every hot kernel in this crate (grid sampling, cell meshing, voxel
//! parity counts, scanline rendering) is expressed as an independent
//! per-index computation and funneled through the helpers below. With the
//! `parallel` feature (on by default) `ExecMode::Parallel` runs on rayon;
//! without it the same mode degrades to the sequential path. Results are
//! ordered by index either way, so output is identical across modes and
//! thread counts.

/// How to run a data-parallel loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    /// Single-threaded, in index order.
    Sequential,
    /// Rayon work-stealing when the `parallel` feature is enabled,
    /// otherwise identical to `Sequential`.
    #[default]
    Parallel,
}

/// Maps `f` over `0..n`, collecting results in index order.
pub fn map_indexed<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(f).collect(),
        ExecMode::Parallel => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..n).map(f).collect()
            }
        }
    }
}

/// Sums `f` over `0..n`. Integer addition commutes, so the reduction is
/// independent of split points and thread count.
pub fn sum_indexed<F>(mode: ExecMode, n: usize, f: F) -> u64
where
    F: Fn(usize) -> u64 + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(f).sum(),
        ExecMode::Parallel => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).sum()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..n).map(f).sum()
            }
        }
    }
}
