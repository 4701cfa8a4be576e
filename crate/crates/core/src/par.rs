//! Execution strategy for data-parallel loops.
//!
//! Every helper here produces results in input order and reduces in a fixed
//! order, so `Parallel` and `Sequential` give bitwise-identical output.

/// How data-parallel loops are executed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise sequential.
    #[default]
    Parallel,
}

impl Execution {
    /// True when work will actually be spread over the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Chunk length used for fixed-shape reductions.
pub const REDUCE_CHUNK: usize = 4096;

/// Order-preserving map over a slice.
pub fn map_slice<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Order-preserving map over `0..n`.
pub fn map_range<R, F>(exec: Execution, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Fills `out[i] = f(i)`.
pub fn fill_indexed<F>(exec: Execution, out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() && out.len() > REDUCE_CHUNK {
        use rayon::prelude::*;
        out.par_chunks_mut(REDUCE_CHUNK)
            .enumerate()
            .for_each(|(c, chunk)| {
                let base = c * REDUCE_CHUNK;
                for (k, v) in chunk.iter_mut().enumerate() {
                    *v = f(base + k);
                }
            });
        return;
    }
    let _ = exec;
    for (i, v) in out.iter_mut().enumerate() {
        *v = f(i);
    }
}

/// Sum of `f(i)` over `0..n`, computed as a sequential sum of fixed-size
/// chunk partials.
pub fn sum_indexed<F>(exec: Execution, n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks = n.div_ceil(REDUCE_CHUNK);
    let partial = |c: usize| {
        let lo = c * REDUCE_CHUNK;
        let hi = (lo + REDUCE_CHUNK).min(n);
        let mut s = 0.0;
        for i in lo..hi {
            s += f(i);
        }
        s
    };
    map_range(exec, chunks, partial).into_iter().sum()
}

/// Deterministic dot product.
pub fn dot(exec: Execution, a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    sum_indexed(exec, a.len(), |i| a[i] * b[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_sums_agree_bitwise() {
        let n = 3 * REDUCE_CHUNK + 17;
        let f = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let a = sum_indexed(Execution::Sequential, n, f);
        let b = sum_indexed(Execution::Parallel, n, f);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn map_preserves_order() {
        let v: Vec<usize> = (0..1000).collect();
        let out = map_slice(Execution::Parallel, &v, |x| x * 2);
        assert!(out.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }
}
