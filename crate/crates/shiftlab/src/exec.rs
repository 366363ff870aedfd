//! Data-parallel inner loops with a sequential fallback.
//!
//! With the `parallel` feature (the default) index maps run on the rayon
//! pool; without it they run inline. Results are identical either way:
//! maps are order-preserving and reductions fold fixed-size chunks in
//! index order, so the grouping of floating-point sums never depends on
//! the thread count.
//!
//! [`run_sequential`] forces the sequential path inside a closure even
//! when the feature is enabled; the benches use it to compare both lanes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use std::cell::Cell;

thread_local! {
    static FORCE_SEQ: Cell<bool> = const { Cell::new(false) };
}

/// Run `f` with the sequential lane forced on the current thread.
pub fn run_sequential<R>(f: impl FnOnce() -> R) -> R {
    let prev = FORCE_SEQ.with(|c| c.replace(true));
    let out = f();
    FORCE_SEQ.with(|c| c.set(prev));
    out
}

/// True when the calling thread has forced sequential execution.
pub fn sequential_forced() -> bool {
    FORCE_SEQ.with(Cell::get)
}

/// `(0..n).map(f)` collected in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if sequential_forced() {
        map_indexed_seq(n, f)
    } else {
        (0..n).into_par_iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_seq(n, f)
}

/// Sequential lane, always available.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Default chunk length for [`chunk_fold`]. Fixed so that the grouping of
/// partial sums is a property of the input, not of the machine.
pub const FOLD_CHUNK: usize = 16;

/// Fold `fill(i, &mut acc)` over `0..n` into one accumulator.
///
/// Items are grouped into consecutive chunks of `chunk` items; each chunk
/// fills its own accumulator sequentially (possibly on another thread) and
/// the chunk accumulators merge in chunk order.
pub fn chunk_fold<A, F, M>(
    n: usize,
    chunk: usize,
    init: impl Fn() -> A + Sync + Send,
    fill: F,
    merge: M,
) -> A
where
    A: Send,
    F: Fn(usize, &mut A) + Sync + Send,
    M: Fn(&mut A, A),
{
    assert!(chunk > 0, "chunk length must be positive");
    let n_chunks = n.div_ceil(chunk).max(1);
    let mut parts = map_indexed(n_chunks, |ci| {
        let mut acc = init();
        let lo = ci * chunk;
        let hi = ((ci + 1) * chunk).min(n);
        for i in lo..hi {
            fill(i, &mut acc);
        }
        acc
    });
    let mut out = parts.remove(0);
    for part in parts {
        merge(&mut out, part);
    }
    out
}
