//! Dispatch helpers for the optional rayon backend.
//!
//! Both helpers split a buffer into equally sized independent chunks. Each
//! chunk is produced by exactly one closure invocation with a fixed internal
//! loop order, so the sequential fallback (built with
//! `--no-default-features`) yields bit-identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Apply `f` to every `chunk_len`-sized chunk of `buf`, passing the chunk index.
pub(crate) fn for_each_chunk_mut<E, F>(buf: &mut [E], chunk_len: usize, f: F)
where
    E: Send,
    F: Fn(usize, &mut [E]) + Sync,
{
    debug_assert!(chunk_len > 0 && buf.len() % chunk_len == 0);
    #[cfg(feature = "parallel")]
    buf.par_chunks_mut(chunk_len)
        .enumerate()
        .for_each(|(i, chunk)| f(i, chunk));
    #[cfg(not(feature = "parallel"))]
    buf.chunks_mut(chunk_len)
        .enumerate()
        .for_each(|(i, chunk)| f(i, chunk));
}

/// Map indices `0..n` to values, preserving order.
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
