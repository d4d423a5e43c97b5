//! Masked point-to-point transfer over vertex-disjoint paths.
//!
//! The message `x` of length `d - ell` and `ell` masks `r` are the
//! coefficients of `f(y) = Σ x_k y^k + Σ r_k y^{d-ell+k}`; path `i` carries
//! `f(i)`.

use crate::field::{Field, FieldMatrix};

use super::SchemeError;

/// Shares `f(1), …, f(d)`.
pub fn shares(field: Field, x: &[u32], r: &[u32]) -> Vec<u32> {
    let d = x.len() + r.len();
    (1..=d as u32)
        .map(|p| {
            let p = field.reduce(p as u64);
            let mut acc = 0;
            let mut pw = 1 % field.q();
            for &c in x.iter().chain(r) {
                acc = field.add(acc, field.mul(c, pw));
                pw = field.mul(pw, p);
            }
            acc
        })
        .collect()
}

/// Recovers the message from all `d` shares.
pub fn reconstruct(field: Field, shares: &[u32], width: usize) -> Result<Vec<u32>, SchemeError> {
    let d = shares.len();
    if field.q() as usize <= d {
        return Err(SchemeError::FieldTooSmall {
            q: field.q(),
            detail: format!("{d} distinct nonzero evaluation points needed"),
        });
    }
    let v = FieldMatrix::from_fn(field, d, d, |i, k| field.pow(i as u32 + 1, k as u64) as u64);
    let inv = v
        .inverse()
        .map_err(|_| SchemeError::SingularSubmatrix { site: "share evaluation matrix".into() })?;
    Ok(inv.mul_vec(shares)[..width].to_vec())
}
