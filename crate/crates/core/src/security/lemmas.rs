use std::collections::HashMap;

use crate::field::{extended_points, symmetric_coord_count, symmetric_from_coords, vandermonde_matrix, EvalPoint, Field, FieldMatrix};
use crate::protocol::{shamir, symmetric_secrecy_holds};

use super::enumerate::{par_enumerate, state_count};
use super::mi::mi_from_cells;
use super::SecurityError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lemma {
    /// Block form of `Uᵀ M U` under `M V₁ = 0`.
    BlockForm { d: usize, ell: usize },
    /// Independence of `[M v]_{1:d-ell}` and `M V_ε`.
    ProjectionSecrecy { d: usize, ell: usize },
    /// Uniformity of `A B` for uniform `A` (`rows × inner`) and a full
    /// column rank Vandermonde `B` (`inner × cols`).
    ProductUniform { rows: usize, inner: usize, cols: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaReport {
    pub lemma: Lemma,
    pub q: u32,
    pub states: u128,
    pub passed: bool,
    pub detail: String,
}

fn budget_check(states: Option<u128>, budget: u128) -> Result<u128, SecurityError> {
    match states {
        Some(s) if s <= budget => Ok(s),
        _ => Err(SecurityError::BudgetExceeded { required: states, allowed: budget }),
    }
}

fn field(q: u32) -> Result<Field, SecurityError> {
    Field::new(q).map_err(|e| SecurityError::Precondition(e.to_string()))
}

pub fn verify_matrix_lemma(lemma: Lemma, q: u32, budget: u128) -> Result<LemmaReport, SecurityError> {
    let f = field(q)?;
    match lemma {
        Lemma::BlockForm { d, ell } => block_form(f, d, ell, budget),
        Lemma::ProjectionSecrecy { d, ell } => projection_secrecy(f, d, ell, budget),
        Lemma::ProductUniform { rows, inner, cols } => product_uniform(f, rows, inner, cols, budget),
    }
}

fn block_form(f: Field, d: usize, ell: usize, budget: u128) -> Result<LemmaReport, SecurityError> {
    let lemma = Lemma::BlockForm { d, ell };
    let pts = extended_points(f);
    if ell >= d || d > pts.len() {
        return Err(SecurityError::Precondition(format!("need ell < d <= q + 1, got d = {d}, ell = {ell}")));
    }
    let n = symmetric_coord_count(d);
    let states = budget_check(state_count(f.q(), n), budget)?;
    let u = vandermonde_matrix(f, &pts[..d], d);
    let ut = u.transpose();
    let g_dim = d - ell;
    // (conditioned count, block-form violations, histogram of G)
    type Acc = (u64, u64, HashMap<Vec<u32>, u64>);
    let (kept, bad, hist) = par_enumerate(
        f.q(),
        n,
        || -> Acc { (0, 0, HashMap::new()) },
        |acc, coords| {
            let m = symmetric_from_coords(f, d, coords);
            let mu = m.mul(&u);
            if (0..d).any(|r| (0..ell).any(|c| mu.get(r, c) != 0)) {
                return;
            }
            acc.0 += 1;
            let k = ut.mul(&mu);
            let zero_border = (0..d).all(|r| (0..d).all(|c| (r >= ell && c >= ell) || k.get(r, c) == 0));
            if !zero_border || !k.is_symmetric() {
                acc.1 += 1;
            }
            let mut g = Vec::with_capacity(symmetric_coord_count(g_dim));
            for r in ell..d {
                for c in r..d {
                    g.push(k.get(r, c));
                }
            }
            *acc.2.entry(g).or_insert(0) += 1;
        },
        |mut a, b| {
            a.0 += b.0;
            a.1 += b.1;
            for (k, c) in b.2 {
                *a.2.entry(k).or_insert(0) += c;
            }
            a
        },
    );
    let g_space = state_count(f.q(), symmetric_coord_count(g_dim)).unwrap_or(u128::MAX);
    let first = hist.values().next().copied().unwrap_or(0);
    let uniform = hist.len() as u128 == g_space && hist.values().all(|&c| c == first);
    Ok(LemmaReport {
        lemma,
        q: f.q(),
        states,
        passed: bad == 0 && uniform && kept > 0,
        detail: format!(
            "{kept} of {states} symmetric matrices satisfy M V1 = 0; block-form violations {bad}; \
             G takes {} of {g_space} symmetric values, {first} times each",
            hist.len()
        ),
    })
}

fn projection_secrecy(f: Field, d: usize, ell: usize, budget: u128) -> Result<LemmaReport, SecurityError> {
    let lemma = Lemma::ProjectionSecrecy { d, ell };
    let q = f.q() as usize;
    if ell >= d || ell + 1 > q {
        return Err(SecurityError::Precondition(format!("need ell < d and ell + 1 <= q, got d = {d}, ell = {ell}")));
    }
    let n = symmetric_coord_count(d);
    let per = state_count(f.q(), n);
    // configurations: key point a, observed points (sorted, distinct from a)
    let mut configs: Vec<(u32, Vec<u32>)> = Vec::new();
    for a in 0..f.q() {
        let others: Vec<u32> = (0..f.q()).filter(|&b| b != a).collect();
        for subset in combinations(&others, ell) {
            configs.push((a, subset));
        }
    }
    let states = budget_check(per.and_then(|p| p.checked_mul(configs.len() as u128)), budget)?;
    let len = d - ell;
    let (mut zero_point, mut zero_point_leaks, mut failures, mut mismatches) = (0, 0, 0, 0);
    for (a, obs) in &configs {
        let v = EvalPoint::Finite(*a).vector(f, d);
        let cols: Vec<Vec<u32>> = obs.iter().map(|&b| EvalPoint::Finite(b).vector(f, d)).collect();
        let col_refs: Vec<&[u32]> = cols.iter().map(Vec::as_slice).collect();
        let observed = FieldMatrix::from_columns(f, d, &col_refs);
        let cells = par_enumerate(
            f.q(),
            n,
            HashMap::new,
            |acc: &mut HashMap<(Vec<u32>, Vec<u32>), u64>, coords| {
                let m = symmetric_from_coords(f, d, coords);
                let key = m.mul_vec(&v)[..len].to_vec();
                let o = m.mul(&observed).raw().to_vec();
                *acc.entry((key, o)).or_insert(0) += 1;
            },
            |mut a, b| {
                for (k, c) in b {
                    *a.entry(k).or_insert(0) += c;
                }
                a
            },
        );
        let mi = mi_from_cells(cells.into_iter().map(|((k, o), c)| (k, o, c)));
        let predicted = symmetric_secrecy_holds(f, &v, len, &col_refs);
        if predicted != mi.is_zero {
            mismatches += 1;
        }
        if obs.contains(&0) {
            zero_point += 1;
            if !mi.is_zero {
                zero_point_leaks += 1;
            }
        } else if !mi.is_zero {
            failures += 1;
        }
    }
    let nonzero = configs.len() - zero_point;
    Ok(LemmaReport {
        lemma,
        q: f.q(),
        states,
        passed: failures == 0 && mismatches == 0 && nonzero > 0,
        detail: format!(
            "{} configurations: {nonzero} with nonzero observed points, {failures} dependent; \
             {zero_point} with the zero point observed, {zero_point_leaks} dependent; \
             rank predicate disagreements {mismatches}",
            configs.len()
        ),
    })
}

fn combinations(pool: &[u32], k: usize) -> Vec<Vec<u32>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..pool.len() {
        for mut rest in combinations(&pool[i + 1..], k - 1) {
            rest.insert(0, pool[i]);
            out.push(rest);
        }
    }
    out
}

fn product_uniform(f: Field, rows: usize, inner: usize, cols: usize, budget: u128) -> Result<LemmaReport, SecurityError> {
    let lemma = Lemma::ProductUniform { rows, inner, cols };
    let pts = extended_points(f);
    if rows == 0 || cols == 0 || cols > inner || cols > pts.len() {
        return Err(SecurityError::Precondition(format!(
            "need 1 <= cols <= inner and cols <= q + 1, got {rows}x{inner} times {inner}x{cols}"
        )));
    }
    let n = rows * inner;
    let states = budget_check(state_count(f.q(), n), budget)?;
    let b = vandermonde_matrix(f, &pts[..cols], inner);
    let out_space = state_count(f.q(), rows * cols).expect("small");
    let hist = par_enumerate(
        f.q(),
        n,
        || vec![0u64; out_space as usize],
        |h: &mut Vec<u64>, coords| {
            let mut idx = 0usize;
            for r in 0..rows {
                let a = &coords[r * inner..(r + 1) * inner];
                for c in 0..cols {
                    let mut acc = 0;
                    for (k, &ak) in a.iter().enumerate() {
                        acc = f.add(acc, f.mul(ak, b.get(k, c)));
                    }
                    idx = idx * f.q() as usize + acc as usize;
                }
            }
            h[idx] += 1;
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        },
    );
    let expect = (states / out_space) as u64;
    let uniform = hist.iter().all(|&c| c == expect);
    Ok(LemmaReport {
        lemma,
        q: f.q(),
        states,
        passed: uniform,
        detail: format!("A B takes each of {out_space} values {expect} times: {uniform}"),
    })
}

/// All `(rows, inner, cols)` whose enumeration has at most `max_states` states.
pub fn product_uniform_dims(q: u32, max_states: u128) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for rows in 1.. {
        if state_count(q, rows).is_none_or(|s| s > max_states) {
            break;
        }
        for inner in 1.. {
            if state_count(q, rows * inner).is_none_or(|s| s > max_states) {
                break;
            }
            for cols in 1..=inner.min(q as usize + 1) {
                out.push((rows, inner, cols));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShamirReport {
    pub d: usize,
    pub ell: usize,
    pub q: u32,
    pub states: u128,
    pub reconstructs: bool,
    pub shares_uniform: bool,
    pub passed: bool,
}

/// Exhaustive check of masked transfer: every message is reconstructed from
/// all `d` shares, and every `ell` shares are uniform for every message.
pub fn verify_shamir(d: usize, ell: usize, q: u32, budget: u128) -> Result<ShamirReport, SecurityError> {
    let f = field(q)?;
    if ell >= d || q as usize <= d {
        return Err(SecurityError::Precondition(format!("need ell < d < q, got d = {d}, ell = {ell}, q = {q}")));
    }
    let width = d - ell;
    let states = budget_check(state_count(q, d), budget)?;
    let xs = state_count(q, width).expect("small") as usize;
    let rs = state_count(q, ell).expect("small") as usize;
    let digits = |mut i: usize, n: usize| -> Vec<u32> {
        (0..n)
            .map(|_| {
                let v = (i % q as usize) as u32;
                i /= q as usize;
                v
            })
            .collect()
    };
    let subsets = combinations(&(0..d as u32).collect::<Vec<_>>(), ell);
    let mut reconstructs = true;
    let mut uniform = true;
    for xi in 0..xs {
        let x = digits(xi, width);
        let mut hist: Vec<HashMap<Vec<u32>, u64>> = vec![HashMap::new(); subsets.len()];
        for ri in 0..rs {
            let r = digits(ri, ell);
            let y = shamir::shares(f, &x, &r);
            reconstructs &= shamir::reconstruct(f, &y, width).map(|got| got == x).unwrap_or(false);
            for (h, sub) in hist.iter_mut().zip(&subsets) {
                let seen: Vec<u32> = sub.iter().map(|&i| y[i as usize]).collect();
                *h.entry(seen).or_insert(0) += 1;
            }
        }
        uniform &= hist.iter().all(|h| h.len() == rs && h.values().all(|&c| c == 1));
    }
    Ok(ShamirReport { d, ell, q, states, reconstructs, shares_uniform: uniform, passed: reconstructs && uniform })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_form_smallest() {
        let r = verify_matrix_lemma(Lemma::BlockForm { d: 2, ell: 1 }, 2, 1000).unwrap();
        assert!(r.passed, "{}", r.detail);
        assert!(r.detail.starts_with("2 of 8"), "{}", r.detail);
    }

    #[test]
    fn projection_zero_point_is_reported() {
        let r = verify_matrix_lemma(Lemma::ProjectionSecrecy { d: 2, ell: 1 }, 3, 10_000).unwrap();
        assert!(r.passed, "{}", r.detail);
        assert!(r.detail.contains("with the zero point observed, 2 dependent"), "{}", r.detail);
    }

    #[test]
    fn product_uniform_square() {
        let r = verify_matrix_lemma(Lemma::ProductUniform { rows: 1, inner: 2, cols: 2 }, 3, 1000).unwrap();
        assert!(r.passed);
    }

    #[test]
    fn shamir_small() {
        let r = verify_shamir(2, 1, 5, 1000).unwrap();
        assert!(r.passed);
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            verify_matrix_lemma(Lemma::BlockForm { d: 3, ell: 1 }, 3, 10),
            Err(SecurityError::BudgetExceeded { .. })
        ));
    }
}
