use std::collections::BTreeMap;
use std::fmt;

use super::{Field, FieldElement, FieldMatrix, LinalgError};

/// A point of the projective moment curve: finite `α` gives `(1, α, …, α^{d-1})`,
/// the point at infinity gives `(0, …, 0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EvalPoint {
    Finite(u32),
    Infinity,
}

impl EvalPoint {
    pub fn vector(self, field: Field, d: usize) -> Vec<u32> {
        match self {
            EvalPoint::Finite(a) => {
                let mut out = Vec::with_capacity(d);
                let mut p = 1 % field.q();
                for _ in 0..d {
                    out.push(p);
                    p = field.mul(p, a);
                }
                out
            }
            EvalPoint::Infinity => {
                let mut out = vec![0; d];
                if d > 0 {
                    out[d - 1] = 1;
                }
                out
            }
        }
    }
}

impl fmt::Display for EvalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalPoint::Finite(a) => write!(f, "{a}"),
            EvalPoint::Infinity => write!(f, "inf"),
        }
    }
}

pub fn vandermonde_vector(alpha: FieldElement, d: usize) -> FieldMatrix {
    let v = EvalPoint::Finite(alpha.value()).vector(alpha.field(), d);
    FieldMatrix::column_vector(alpha.field(), &v)
}

/// `d × k` matrix whose columns are the moment vectors of `points`.
pub fn vandermonde_matrix(field: Field, points: &[EvalPoint], d: usize) -> FieldMatrix {
    let cols: Vec<Vec<u32>> = points.iter().map(|p| p.vector(field, d)).collect();
    let refs: Vec<&[u32]> = cols.iter().map(Vec::as_slice).collect();
    FieldMatrix::from_columns(field, d, &refs)
}

/// All `q + 1` curve points: nonzero finite points first, then infinity, then zero.
/// A set of these whose members avoid zero has invertible trailing-row blocks,
/// which is the property secrecy arguments lean on.
pub fn extended_points(field: Field) -> Vec<EvalPoint> {
    let mut pts: Vec<EvalPoint> = (1..field.q()).map(EvalPoint::Finite).collect();
    pts.push(EvalPoint::Infinity);
    pts.push(EvalPoint::Finite(0));
    pts
}

/// Hands out pairwise-distinct finite evaluation points, one per purpose,
/// in request order (nonzero points first).
#[derive(Debug, Clone)]
pub struct VandermondeIndexAllocator {
    field: Field,
    next: u32,
    assigned: BTreeMap<String, u32>,
}

impl VandermondeIndexAllocator {
    pub fn new(field: Field) -> Self {
        VandermondeIndexAllocator { field, next: 0, assigned: BTreeMap::new() }
    }

    pub fn alloc(&mut self, purpose: &str) -> Result<FieldElement, LinalgError> {
        if let Some(&a) = self.assigned.get(purpose) {
            return Ok(self.field.elem(a as u64));
        }
        let q = self.field.q();
        if self.next >= q {
            return Err(LinalgError::FieldTooSmall { needed: self.next as usize + 1, available: q as usize });
        }
        // 1, 2, …, q-1, then 0
        let a = (self.next + 1) % q;
        self.next += 1;
        self.assigned.insert(purpose.to_string(), a);
        Ok(self.field.elem(a as u64))
    }

    pub fn get(&self, purpose: &str) -> Option<FieldElement> {
        self.assigned.get(purpose).map(|&a| self.field.elem(a as u64))
    }

    pub fn len(&self) -> usize {
        self.assigned.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assigned.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_examples() {
        let f5 = Field::new(5).unwrap();
        assert_eq!(vandermonde_vector(f5.elem(2), 3).column(0), vec![1, 2, 4]);
        assert_eq!(vandermonde_vector(f5.elem(0), 4).column(0), vec![1, 0, 0, 0]);
        let f7 = Field::new(7).unwrap();
        assert_eq!(vandermonde_vector(f7.elem(1), 3).column(0), vec![1, 1, 1]);
    }

    #[test]
    fn allocator_is_distinct_and_stable() {
        let f = Field::new(3).unwrap();
        let mut a = VandermondeIndexAllocator::new(f);
        assert_eq!(a.alloc("x").unwrap().value(), 1);
        assert_eq!(a.alloc("y").unwrap().value(), 2);
        assert_eq!(a.alloc("x").unwrap().value(), 1);
        assert_eq!(a.alloc("z").unwrap().value(), 0);
        assert!(matches!(a.alloc("w"), Err(LinalgError::FieldTooSmall { .. })));
    }

    #[test]
    fn extended_point_order() {
        let f = Field::new(3).unwrap();
        assert_eq!(
            extended_points(f),
            vec![EvalPoint::Finite(1), EvalPoint::Finite(2), EvalPoint::Infinity, EvalPoint::Finite(0)]
        );
    }
}
