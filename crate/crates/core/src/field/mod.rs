//! Prime-field arithmetic, dense matrices, Vandermonde structures and the
//! randomness sources every scheme draws from.

mod matrix;
mod random;
mod vandermonde;

pub use matrix::{mat_inverse, FieldMatrix};
pub use random::{
    sample_symmetric, symmetric_coord_count, symmetric_from_coords, RandomSource,
    ScriptedSource, SplitSeed, StreamRng,
};
pub use vandermonde::{
    extended_points, vandermonde_matrix, vandermonde_vector, EvalPoint, VandermondeIndexAllocator,
};

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Largest modulus accepted; keeps every product inside a `u64`.
pub const MAX_MODULUS: u32 = 1 << 31;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("modulus {0} is not a prime below 2^31")]
    NotPrime(u32),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("matrix is singular (rank {rank} of {dim})")]
    Singular { rank: usize, dim: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("field too small: need {needed} distinct points, field offers {available}")]
    FieldTooSmall { needed: usize, available: usize },
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let n = n as u64;
    let mut k = 2u64;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

/// The prime field F_q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Field {
    q: u32,
}

impl Field {
    pub fn new(q: u32) -> Result<Field, LinalgError> {
        if q >= MAX_MODULUS || !is_prime(q) {
            return Err(LinalgError::NotPrime(q));
        }
        Ok(Field { q })
    }

    pub fn q(self) -> u32 {
        self.q
    }

    pub fn elem(self, v: u64) -> FieldElement {
        FieldElement {
            value: (v % self.q as u64) as u32,
            field: self,
        }
    }

    pub fn zero(self) -> FieldElement {
        self.elem(0)
    }

    pub fn one(self) -> FieldElement {
        self.elem(1)
    }

    pub fn elements(self) -> impl Iterator<Item = FieldElement> {
        (0..self.q).map(move |v| FieldElement { value: v, field: self })
    }

    #[inline]
    pub fn reduce(self, v: u64) -> u32 {
        (v % self.q as u64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a as u64 + b as u64;
        if s >= self.q as u64 {
            (s - self.q as u64) as u32
        } else {
            s as u32
        }
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            (a as u64 + self.q as u64 - b as u64) as u32
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.q as u64) as u32
    }

    pub fn pow(self, a: u32, mut e: u64) -> u32 {
        let mut base = a % self.q;
        let mut acc = 1 % self.q;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(self, a: u32) -> Result<u32, LinalgError> {
        let a = a % self.q;
        if a == 0 {
            return Err(LinalgError::ZeroInverse);
        }
        Ok(self.pow(a, self.q as u64 - 2))
    }

    /// Inner product of two equal-length residue slices.
    pub fn dot(self, a: &[u32], b: &[u32]) -> u32 {
        debug_assert_eq!(a.len(), b.len());
        let q = self.q as u64;
        let mut acc = 0u64;
        for (x, y) in a.iter().zip(b) {
            acc = (acc + *x as u64 * *y as u64) % q;
        }
        acc as u32
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.q)
    }
}

/// A canonical residue tagged with its field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u32,
    field: Field,
}

impl FieldElement {
    pub fn value(self) -> u32 {
        self.value
    }

    pub fn field(self) -> Field {
        self.field
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn pow(self, e: u64) -> FieldElement {
        FieldElement {
            value: self.field.pow(self.value, e),
            field: self.field,
        }
    }

    pub fn inv(self) -> Result<FieldElement, LinalgError> {
        ff_inv(self)
    }

    fn same_field(self, other: FieldElement) -> Field {
        assert_eq!(self.field, other.field, "mixed-field arithmetic");
        self.field
    }
}

pub fn ff_inv(a: FieldElement) -> Result<FieldElement, LinalgError> {
    Ok(FieldElement {
        value: a.field.inv(a.value)?,
        field: a.field,
    })
}

impl Add for FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: FieldElement) -> FieldElement {
        let f = self.same_field(rhs);
        FieldElement { value: f.add(self.value, rhs.value), field: f }
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: FieldElement) -> FieldElement {
        let f = self.same_field(rhs);
        FieldElement { value: f.sub(self.value, rhs.value), field: f }
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: FieldElement) -> FieldElement {
        let f = self.same_field(rhs);
        FieldElement { value: f.mul(self.value, rhs.value), field: f }
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement { value: self.field.neg(self.value), field: self.field }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_examples() {
        let f5 = Field::new(5).unwrap();
        assert_eq!(ff_inv(f5.elem(2)).unwrap().value(), 3);
        let f7 = Field::new(7).unwrap();
        assert_eq!(ff_inv(f7.elem(1)).unwrap().value(), 1);
        let f3 = Field::new(3).unwrap();
        assert_eq!(ff_inv(f3.elem(2)).unwrap().value(), 2);
        assert_eq!(ff_inv(f3.zero()), Err(LinalgError::ZeroInverse));
    }

    #[test]
    fn rejects_composites() {
        for q in [0, 1, 4, 6, 9, 15, 21] {
            assert_eq!(Field::new(q), Err(LinalgError::NotPrime(q)));
        }
        for q in [2, 3, 5, 7, 11, 13, 65_537] {
            assert!(Field::new(q).is_ok());
        }
    }

    #[test]
    fn dot_product() {
        let f = Field::new(7).unwrap();
        assert_eq!(f.dot(&[1, 2, 3], &[4, 5, 6]), (4 + 10 + 18) % 7);
    }
}
