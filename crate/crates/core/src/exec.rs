//! Index-ordered data parallelism.
//!
//! Every parallel loop in the crate goes through [`map_indexed`], which
//! returns results in index order regardless of scheduling. Reductions are
//! then done sequentially over that vector (or over fixed-size chunks), so
//! results are bitwise identical between the parallel and sequential modes
//! and across thread counts.

use std::sync::atomic::{AtomicBool, Ordering};

/// Chunk size for chunked reductions. Part of the reduction topology, so it
/// must not depend on the thread count.
pub const REDUCTION_CHUNK: usize = 16;

static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Sequential,
    Parallel,
}

/// Selects the execution mode for subsequent calls. Without the `parallel`
/// feature this is a no-op and everything runs sequentially.
pub fn set_mode(mode: Mode) {
    FORCE_SEQUENTIAL.store(mode == Mode::Sequential, Ordering::SeqCst);
}

pub fn mode() -> Mode {
    if cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.load(Ordering::SeqCst) {
        Mode::Parallel
    } else {
        Mode::Sequential
    }
}

/// `(0..n).map(f).collect()`, possibly in parallel.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode() == Mode::Parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Maps each chunk `[k·REDUCTION_CHUNK, (k+1)·REDUCTION_CHUNK)` of `0..n`
/// with `f` and returns the per-chunk results in order. Callers fold the
/// results left to right.
pub fn map_chunks<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
{
    let chunks = n.div_ceil(REDUCTION_CHUNK);
    map_indexed(chunks, |k| {
        let lo = k * REDUCTION_CHUNK;
        f(lo..(lo + REDUCTION_CHUNK).min(n))
    })
}

/// Chunks evaluated per parallel batch in [`fold_chunks`]; bounds memory.
const BATCH_CHUNKS: usize = 8;

/// Maps chunks of `0..n` like [`map_chunks`] but folds the results into
/// `acc` in chunk order as each batch completes, so only a few chunk
/// results are alive at a time.
pub fn fold_chunks<T, A, F, G>(n: usize, mut acc: A, f: F, mut fold: G) -> A
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
    G: FnMut(&mut A, T),
{
    let chunks = n.div_ceil(REDUCTION_CHUNK);
    let mut start = 0;
    while start < chunks {
        let end = (start + BATCH_CHUNKS).min(chunks);
        let parts = map_indexed(end - start, |k| {
            let lo = (start + k) * REDUCTION_CHUNK;
            f(lo..(lo + REDUCTION_CHUNK).min(n))
        });
        for p in parts {
            fold(&mut acc, p);
        }
        start = end;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_keep_index_order() {
        let v = map_indexed(100, |i| i * i);
        assert_eq!(v, (0..100).map(|i| i * i).collect::<Vec<_>>());
    }

    #[test]
    fn fold_chunks_visits_in_order() {
        let order = fold_chunks(100, Vec::new(), |r| r.start, |acc: &mut Vec<usize>, s| acc.push(s));
        assert_eq!(order, (0..100).step_by(REDUCTION_CHUNK).collect::<Vec<_>>());
    }

    #[test]
    fn chunks_cover_range_once() {
        let parts = map_chunks(37, |r| r.collect::<Vec<_>>());
        let flat: Vec<usize> = parts.into_iter().flatten().collect();
        assert_eq!(flat, (0..37).collect::<Vec<_>>());
    }
}
