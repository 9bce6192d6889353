//! Value-semantic Gram-matrix state.

use num_traits::One;

use crate::error::{Error, Result};
use crate::fingerprint::RowSignatures;
use crate::linalg;
use crate::matrix::SquareMatrix;
use crate::scalar::{PsdReport, Rational, Scalar};
use crate::tolerance::Tolerances;

/// Symmetric, unit-diagonal matrix of pairwise cosines of `count()` unit
/// vectors in dimension `dim()`.
///
/// Construction checks symmetry and the unit diagonal exactly. PSD, rank and
/// the cosine cap are checked on demand by [`GramState::validate`] because
/// they cost a factorization.
#[derive(Clone, PartialEq)]
pub struct GramState<S> {
    dim: usize,
    entries: SquareMatrix<S>,
}

impl<S: Scalar> std::fmt::Debug for GramState<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GramState(dim={}, m={}) {:?}", self.dim, self.count(), self.entries)
    }
}

impl<S: Scalar> GramState<S> {
    pub fn new(dim: usize, entries: SquareMatrix<S>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("dimension must be positive".into()));
        }
        if let Some((row, col)) = entries.first_asymmetry() {
            return Err(Error::NotSymmetric { row, col });
        }
        for i in 0..entries.size() {
            if !entries.get(i, i).is_one() {
                return Err(Error::NonUnitDiagonal { index: i });
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(dim: usize, rows: Vec<Vec<S>>) -> Result<Self> {
        Self::new(dim, SquareMatrix::from_rows(rows)?)
    }

    /// The single-sphere state `[[1]]`.
    pub fn single(dim: usize) -> Result<Self> {
        Self::new(dim, SquareMatrix::from_row_major(1, vec![S::one()])?)
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            entries: SquareMatrix::from_row_major(0, Vec::new()).expect("empty"),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of spheres (rows).
    #[inline]
    pub fn count(&self) -> usize {
        self.entries.size()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &S {
        self.entries.get(i, j)
    }

    pub fn row(&self, i: usize) -> &[S] {
        self.entries.row(i)
    }

    pub fn entries(&self) -> &SquareMatrix<S> {
        &self.entries
    }

    /// Borders the matrix with `column` and a unit diagonal entry.
    pub fn extend(&self, column: &[S]) -> Result<Self> {
        if column.len() != self.count() {
            return Err(Error::DimensionMismatch {
                expected: self.count(),
                actual: column.len(),
            });
        }
        Ok(Self {
            dim: self.dim,
            entries: self.entries.bordered(column, S::one()),
        })
    }

    /// [`extend`](Self::extend) followed by full revalidation of the result.
    pub fn extend_checked(&self, column: &[S], tol: &Tolerances) -> Result<Self> {
        let next = self.extend(column)?;
        next.validate(tol)
            .map_err(|e| Error::InfeasibleColumn(e.to_string()))?;
        Ok(next)
    }

    pub fn psd_report(&self, tol: &Tolerances) -> PsdReport {
        S::psd_report(&self.entries, tol)
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        let t = Tolerances {
            psd: tol,
            ..Tolerances::default()
        };
        self.psd_report(&t).psd
    }

    pub fn rank_of(&self, tol: f64) -> usize {
        let t = Tolerances {
            rank: tol,
            ..Tolerances::default()
        };
        self.psd_report(&t).rank
    }

    /// Largest off-diagonal entry, `None` for fewer than two rows.
    pub fn max_cosine(&self) -> Option<S> {
        let m = self.count();
        let mut best: Option<&S> = None;
        for i in 0..m {
            for j in (i + 1)..m {
                let v = self.get(i, j);
                if best.is_none_or(|b| v > b) {
                    best = Some(v);
                }
            }
        }
        best.cloned()
    }

    /// First off-diagonal entry above `1/2` (with tolerance), if any.
    pub fn cap_violation(&self, tol: f64) -> Option<(usize, usize, S)> {
        let half = S::half();
        let m = self.count();
        for i in 0..m {
            for j in (i + 1)..m {
                if !self.get(i, j).le_tol(&half, tol) {
                    return Some((i, j, self.get(i, j).clone()));
                }
            }
        }
        None
    }

    /// Checks every state invariant: cosine cap, PSD, and rank at most `dim`.
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        if let Some((row, col, value)) = self.cap_violation(tol.cosine_cap) {
            return Err(Error::CosineCapViolation {
                row,
                col,
                value: value.to_f64(),
            });
        }
        let report = self.psd_report(tol);
        if !report.psd {
            return Err(Error::NotPsd);
        }
        if report.rank > self.dim {
            return Err(Error::RankExceedsDim {
                dim: self.dim,
                rank: report.rank,
            });
        }
        Ok(())
    }

    /// Principal submatrix on `keep`, in that order.
    pub fn principal(&self, keep: &[usize]) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.principal(keep),
        }
    }

    /// State reordered so that new row `k` is old row `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        debug_assert_eq!(perm.len(), self.count());
        self.principal(perm)
    }

    pub fn to_float(&self) -> GramState<f64> {
        GramState {
            dim: self.dim,
            entries: self.entries.map(|v| v.to_f64()),
        }
    }

    /// Entrywise conversion to another scalar type.
    pub fn try_convert<T: Scalar>(&self, f: impl Fn(&S) -> Result<T>) -> Result<GramState<T>> {
        let m = self.count();
        let data = self.entries.as_slice().iter().map(f).collect::<Result<Vec<T>>>()?;
        GramState::new(self.dim, SquareMatrix::from_row_major(m, data)?)
    }

    pub fn fingerprint(&self) -> u64 {
        RowSignatures::of(self).hash()
    }

    /// Unit vectors in `dim()` coordinates whose Gram matrix reproduces this
    /// state, from the top eigenspace of a symmetric eigendecomposition.
    pub fn reconstruct_vectors(&self) -> Vec<Vec<f64>> {
        let m = self.count();
        let float = self.entries.map(|v| v.to_f64());
        let pairs = linalg::eigenpairs_descending(&float);
        let keep = self.dim.min(m);
        let mut coords = vec![vec![0.0; self.dim]; m];
        for (k, (value, vector)) in pairs.iter().take(keep).enumerate() {
            let scale = value.max(0.0).sqrt();
            for (i, row) in coords.iter_mut().enumerate() {
                row[k] = vector[i] * scale;
            }
        }
        coords
    }
}

impl GramState<f64> {
    /// Gram matrix of explicit coordinates; diagonal forced to exactly 1.
    pub fn from_vectors(dim: usize, vectors: &[Vec<f64>]) -> Result<Self> {
        let m = vectors.len();
        let mut entries = SquareMatrix::zeros(m);
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: v.len(),
                });
            }
            entries.set(i, i, 1.0);
            for j in (i + 1)..m {
                let d = linalg::dot(v, &vectors[j]);
                entries.set(i, j, d);
                entries.set(j, i, d);
            }
        }
        Self::new(dim, entries)
    }
}

impl GramState<Rational> {
    pub fn rational_identity(dim: usize, m: usize) -> Self {
        let mut entries = SquareMatrix::zeros(m);
        for i in 0..m {
            entries.set(i, i, Rational::one());
        }
        Self { dim, entries }
    }
}

/// Off-diagonal entries in row-major upper-triangle order.
pub fn upper_entries<S: Scalar>(state: &GramState<S>) -> impl Iterator<Item = &S> {
    let m = state.count();
    (0..m).flat_map(move |i| ((i + 1)..m).map(move |j| state.get(i, j)))
}
