//! Data-parallel helpers with a sequential fallback.
//!
//! Bulk loops (Wigner rows, per-axis transforms on two-mode states,
//! measurement shots) go through these helpers. With the `parallel` feature
//! they run on rayon's pool; without it, or when [`Exec::Seq`] is requested
//! explicitly, they run in order on the calling thread. Every helper assembles
//! results by index, so output is identical in both modes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution strategy for bulk loops.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Seq,
    Par,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Par
        } else {
            Exec::Seq
        }
    }
}

/// `(0..n).map(f).collect()`, possibly in parallel.
pub fn map_range<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Par => (0..n).into_par_iter().map(f).collect(),
        _ => (0..n).map(f).collect(),
    }
}

/// Apply `f(chunk_index, chunk)` to consecutive `chunk_len`-sized chunks.
pub fn for_each_chunk_mut<T, F>(exec: Exec, data: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Par => data.par_chunks_mut(chunk_len).enumerate().for_each(|(i, c)| f(i, c)),
        _ => data.chunks_mut(chunk_len).enumerate().for_each(|(i, c)| f(i, c)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seq_and_par_agree() {
        let f = |i: usize| (i as f64).sqrt().sin();
        assert_eq!(map_range(Exec::Seq, 1000, f), map_range(Exec::Par, 1000, f));

        let mut a: Vec<f64> = (0..64).map(|i| i as f64).collect();
        let mut b = a.clone();
        let g = |k: usize, c: &mut [f64]| c.iter_mut().for_each(|v| *v *= k as f64 + 0.5);
        for_each_chunk_mut(Exec::Seq, &mut a, 8, g);
        for_each_chunk_mut(Exec::Par, &mut b, 8, g);
        assert_eq!(a, b);
    }
}
