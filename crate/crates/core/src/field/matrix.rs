use std::fmt;
use std::ops::Index;

use super::{Field, FieldElement, LinalgError};

/// Dense row-major matrix over a prime field.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl FieldMatrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> FieldMatrix {
        FieldMatrix { field, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(field: Field, n: usize) -> FieldMatrix {
        let mut m = FieldMatrix::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1 % field.q();
        }
        m
    }

    pub fn from_fn(
        field: Field,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> u64,
    ) -> FieldMatrix {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(field.reduce(f(i, j)));
            }
        }
        FieldMatrix { field, rows, cols, data }
    }

    pub fn from_rows(field: Field, rows: &[Vec<u64>]) -> FieldMatrix {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        FieldMatrix::from_fn(field, r, c, |i, j| rows[i][j])
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(field: Field, height: usize, columns: &[&[u32]]) -> FieldMatrix {
        assert!(columns.iter().all(|c| c.len() == height), "column height mismatch");
        FieldMatrix::from_fn(field, height, columns.len(), |i, j| columns[j][i] as u64)
    }

    pub fn column_vector(field: Field, v: &[u32]) -> FieldMatrix {
        FieldMatrix::from_fn(field, v.len(), 1, |i, _| v[i] as u64)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn raw(&self) -> &[u32] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    pub fn entry(&self, i: usize, j: usize) -> FieldElement {
        self.field.elem(self.get(i, j) as u64)
    }

    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v % self.field.q();
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u32> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> FieldMatrix {
        FieldMatrix::from_fn(self.field, self.cols, self.rows, |i, j| self.get(j, i) as u64)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn mul(&self, other: &FieldMatrix) -> FieldMatrix {
        assert_eq!(self.field, other.field, "mixed-field product");
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let q = self.field.q() as u64;
        let mut out = FieldMatrix::zeros(self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = 0u64;
                for k in 0..self.cols {
                    acc = (acc + self.get(i, k) as u64 * other.get(k, j) as u64) % q;
                }
                out.data[i * other.cols + j] = acc as u32;
            }
        }
        out
    }

    /// Matrix-vector product `A v`.
    pub fn mul_vec(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(self.cols, v.len(), "vector length differs from column count");
        (0..self.rows).map(|i| self.field.dot(self.row(i), v)).collect()
    }

    /// Row-vector product `vᵀ A`.
    pub fn vec_mul(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(self.rows, v.len(), "vector length differs from row count");
        let q = self.field.q() as u64;
        (0..self.cols)
            .map(|j| {
                let mut acc = 0u64;
                for (i, x) in v.iter().enumerate() {
                    acc = (acc + *x as u64 * self.get(i, j) as u64) % q;
                }
                acc as u32
            })
            .collect()
    }

    /// Keeps the listed rows, in the listed order.
    pub fn select_rows(&self, rows: &[usize]) -> FieldMatrix {
        FieldMatrix::from_fn(self.field, rows.len(), self.cols, |i, j| self.get(rows[i], j) as u64)
    }

    pub fn select_cols(&self, cols: &[usize]) -> FieldMatrix {
        FieldMatrix::from_fn(self.field, self.rows, cols.len(), |i, j| self.get(i, cols[j]) as u64)
    }

    /// Reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let f = self.field;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                continue;
            };
            if p != r {
                for j in 0..self.cols {
                    self.data.swap(p * self.cols + j, r * self.cols + j);
                }
            }
            let inv = f.inv(self.get(r, c)).expect("pivot is nonzero");
            for j in 0..self.cols {
                let v = f.mul(self.get(r, j), inv);
                self.data[r * self.cols + j] = v;
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let factor = self.get(i, c);
                if factor == 0 {
                    continue;
                }
                for j in 0..self.cols {
                    let v = f.sub(self.get(i, j), f.mul(factor, self.get(r, j)));
                    self.data[i * self.cols + j] = v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    pub fn inverse(&self) -> Result<FieldMatrix, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        let mut aug = FieldMatrix::zeros(self.field, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.data[i * 2 * n + j] = self.get(i, j);
            }
            aug.data[i * 2 * n + n + i] = 1 % self.field.q();
        }
        let pivots = aug.rref();
        let rank = pivots.iter().take_while(|&&c| c < n).count();
        if rank < n {
            return Err(LinalgError::Singular { rank, dim: n });
        }
        Ok(FieldMatrix::from_fn(self.field, n, n, |i, j| aug.get(i, n + j) as u64))
    }
}

pub fn mat_inverse(a: &FieldMatrix) -> Result<FieldMatrix, LinalgError> {
    a.inverse()
}

impl Index<(usize, usize)> for FieldMatrix {
    type Output = u32;
    fn index(&self, (i, j): (usize, usize)) -> &u32 {
        &self.data[i * self.cols + j]
    }
}

impl fmt::Display for FieldMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u32) -> Field {
        Field::new(q).unwrap()
    }

    #[test]
    fn inverse_examples() {
        let id = FieldMatrix::identity(f(5), 3);
        assert_eq!(mat_inverse(&id).unwrap(), id);

        let a = FieldMatrix::from_rows(f(3), &[vec![1, 1], vec![1, 2]]);
        let inv = mat_inverse(&a).unwrap();
        assert_eq!(inv, FieldMatrix::from_rows(f(3), &[vec![2, 2], vec![2, 1]]));
        assert_eq!(a.mul(&inv), FieldMatrix::identity(f(3), 2));

        let s = FieldMatrix::from_rows(f(5), &[vec![1, 1], vec![2, 2]]);
        assert_eq!(mat_inverse(&s), Err(LinalgError::Singular { rank: 1, dim: 2 }));
    }

    #[test]
    fn rank_of_rectangular() {
        let m = FieldMatrix::from_rows(f(7), &[vec![1, 2, 3], vec![2, 4, 6], vec![0, 1, 1]]);
        assert_eq!(m.rank(), 2);
        assert_eq!(m.transpose().rank(), 2);
    }

    #[test]
    fn vector_products() {
        let m = FieldMatrix::from_rows(f(5), &[vec![1, 2], vec![3, 4]]);
        assert_eq!(m.mul_vec(&[1, 1]), vec![3, 2]);
        assert_eq!(m.vec_mul(&[1, 1]), vec![4, 1]);
    }
}
