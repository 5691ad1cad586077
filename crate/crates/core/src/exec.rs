//! Execution policy for the data-parallel kernels.
//!
//! With the `parallel` feature the dense and Hadamard matvecs and the
//! replication harness fan out over rayon. Both policies use the same chunk
//! decomposition and reduce partial results in a fixed order, so they are
//! bit-identical.

/// Defaults to `Parallel` when the feature is enabled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Execution {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

impl Execution {
    /// Maps `f` over `0..count` and returns the results in index order.
    pub fn map_collect<T, F>(self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..count).map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..count).into_par_iter().map(f).collect()
            }
        }
    }

    /// Applies `f(chunk_index, chunk)` to consecutive `chunk_len`-sized chunks of `out`.
    pub fn for_each_chunk_mut<F>(self, out: &mut [f64], chunk_len: usize, f: F)
    where
        F: Fn(usize, &mut [f64]) + Sync + Send,
    {
        let chunk_len = chunk_len.max(1);
        match self {
            Execution::Sequential => out.chunks_mut(chunk_len).enumerate().for_each(|(i, c)| f(i, c)),
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                out.par_chunks_mut(chunk_len).enumerate().for_each(|(i, c)| f(i, c))
            }
        }
    }

    /// Downgrades to sequential when the work is too small to amortize a fork.
    pub fn for_work(self, flops: usize) -> Execution {
        const MIN_PARALLEL_WORK: usize = 1 << 16;
        if flops < MIN_PARALLEL_WORK {
            Execution::Sequential
        } else {
            self
        }
    }
}
