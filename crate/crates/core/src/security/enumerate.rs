//! Parallel enumeration of `F_q^n` over disjoint contiguous index ranges.

use rayon::prelude::*;

/// `q^n`, or `None` past `u128`.
pub fn state_count(q: u32, n: usize) -> Option<u128> {
    (q as u128).checked_pow(n as u32)
}

/// Folds `step` over every vector of `F_q^n` in little-endian odometer
/// order. Chunks are folded independently and merged pairwise in index
/// order, so the result is deterministic for associative `merge`.
pub fn par_enumerate<T, I, S, M>(q: u32, n: usize, init: I, step: S, merge: M) -> T
where
    T: Send,
    I: Fn() -> T + Sync + Send,
    S: Fn(&mut T, &[u32]) + Sync + Send,
    M: Fn(T, T) -> T + Sync + Send,
{
    let total = state_count(q, n).expect("state count checked by caller") as u64;
    let workers = rayon::current_num_threads() as u64;
    let chunk = (total / (workers * 16)).max(1024);
    let chunks = total.div_ceil(chunk);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * chunk;
            let end = (start + chunk).min(total);
            let mut acc = init();
            let mut digits = vec![0u32; n];
            let mut rest = start;
            for d in digits.iter_mut() {
                *d = (rest % q as u64) as u32;
                rest /= q as u64;
            }
            for _ in start..end {
                step(&mut acc, &digits);
                for d in digits.iter_mut() {
                    *d += 1;
                    if *d < q {
                        break;
                    }
                    *d = 0;
                }
            }
            acc
        })
        .reduce(&init, &merge)
}
