//! Deterministic data-parallel reductions.
//!
//! Index ranges are cut into fixed 256-element blocks. Each block is reduced
//! sequentially, block partials are then combined in block order, so the
//! floating-point result does not depend on the number of worker threads —
//! nor on whether the `parallel` feature is enabled at all. Benchmarks force
//! the sequential path through [`run_sequential`] to compare both.

use std::cell::Cell;

/// Block length for all reductions. Fixed: changing it changes results.
pub const BLOCK: usize = 256;

thread_local! {
    static FORCE_SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

/// Run `f` with parallel dispatch disabled on this thread. The numerical
/// results are identical either way; this only exists so the two code paths
/// can be timed against each other.
pub fn run_sequential<R>(f: impl FnOnce() -> R) -> R {
    FORCE_SEQUENTIAL.with(|flag| {
        let prev = flag.replace(true);
        let out = f();
        flag.set(prev);
        out
    })
}

#[inline]
fn parallel_active() -> bool {
    if cfg!(not(feature = "parallel")) {
        return false;
    }
    FORCE_SEQUENTIAL.with(|flag| !flag.get())
}

/// Map block indices `0..blocks` to values, preserving block order.
fn map_blocks<T: Send>(blocks: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        if parallel_active() && blocks > 1 {
            use rayon::prelude::*;
            return (0..blocks).into_par_iter().map(f).collect();
        }
    }
    (0..blocks).map(f).collect()
}

/// Σ_{i<len} term(i), reduced blockwise in fixed order.
pub fn sum_indexed<F>(len: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    if len == 0 {
        return 0.0;
    }
    let blocks = len.div_ceil(BLOCK);
    let partials = map_blocks(blocks, |b| {
        let lo = b * BLOCK;
        let hi = ((b + 1) * BLOCK).min(len);
        let mut acc = 0.0;
        for i in lo..hi {
            acc += term(i);
        }
        acc
    });
    partials.into_iter().sum()
}

/// Vector accumulation: `out = Σ_{i<len} term_i` where `fill(i, acc)` adds
/// term `i` into `acc`. Block partials are combined in block order.
pub fn accumulate_vec<F>(len: usize, dim: usize, fill: F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    let mut out = vec![0.0; dim];
    if len == 0 {
        return out;
    }
    let blocks = len.div_ceil(BLOCK);
    let partials = map_blocks(blocks, |b| {
        let lo = b * BLOCK;
        let hi = ((b + 1) * BLOCK).min(len);
        let mut acc = vec![0.0; dim];
        for i in lo..hi {
            fill(i, &mut acc);
        }
        acc
    });
    for partial in partials {
        for (o, p) in out.iter_mut().zip(&partial) {
            *o += p;
        }
    }
    out
}

/// Ordered map over `0..len` (parallel when available, order preserved).
pub fn map_indexed<T: Send, F>(len: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel_active() && len > 1 {
            use rayon::prelude::*;
            return (0..len).into_par_iter().map(f).collect();
        }
    }
    (0..len).map(f).collect()
}
