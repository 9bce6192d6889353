//! Dense square matrices over a generic scalar.

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq)]
pub struct SquareMatrix<S> {
    n: usize,
    data: Vec<S>,
}

impl<S: Clone + Zero> SquareMatrix<S> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![S::zero(); n * n],
        }
    }
}

impl<S: Clone> SquareMatrix<S> {
    pub fn from_row_major(n: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(Self { n, data })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: S) {
        self.data[i * self.n + j] = value;
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[S]> {
        self.data.chunks(self.n.max(1)).take(self.n)
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    /// Principal submatrix on `keep` (in the given order).
    pub fn principal(&self, keep: &[usize]) -> Self {
        let k = keep.len();
        let mut data = Vec::with_capacity(k * k);
        for &i in keep {
            for &j in keep {
                data.push(self.get(i, j).clone());
            }
        }
        Self { n: k, data }
    }

    /// Borders the matrix with `column` and a new diagonal entry.
    pub fn bordered(&self, column: &[S], corner: S) -> Self {
        debug_assert_eq!(column.len(), self.n);
        let n = self.n + 1;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..self.n {
            data.extend_from_slice(self.row(i));
            data.push(column[i].clone());
        }
        data.extend_from_slice(column);
        data.push(corner);
        Self { n, data }
    }

    pub fn map<T, F: Fn(&S) -> T>(&self, f: F) -> SquareMatrix<T> {
        SquareMatrix {
            n: self.n,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn first_asymmetry(&self) -> Option<(usize, usize)>
    where
        S: PartialEq,
    {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.get(i, j) != self.get(j, i) {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

impl SquareMatrix<f64> {
    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.n, self.n, &self.data)
    }
}

impl<S: fmt::Display> fmt::Debug for SquareMatrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SquareMatrix({}x{})", self.n, self.n)?;
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|j| self.data[i * self.n + j].to_string())
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}
