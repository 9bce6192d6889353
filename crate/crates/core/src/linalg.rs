//! Floating-point kernels: Cholesky, symmetric eigendecomposition, PSD and rank tests.

use nalgebra::SymmetricEigen;

use crate::matrix::SquareMatrix;

/// Lower-triangular Cholesky factor of `m + shift * I`, row-major, or `None`
/// when a non-positive pivot shows up.
pub fn cholesky(m: &SquareMatrix<f64>, shift: f64) -> Option<Vec<f64>> {
    let n = m.size();
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = *m.get(i, j);
            if i == j {
                sum += shift;
            }
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(sum > 0.0) {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Eigenvalues in ascending order.
pub fn eigenvalues(m: &SquareMatrix<f64>) -> Vec<f64> {
    if m.size() == 0 {
        return Vec::new();
    }
    let mut values: Vec<f64> = SymmetricEigen::new(m.to_nalgebra())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Eigenpairs sorted by descending eigenvalue; each vector has length `n`.
pub fn eigenpairs_descending(m: &SquareMatrix<f64>) -> Vec<(f64, Vec<f64>)> {
    let n = m.size();
    if n == 0 {
        return Vec::new();
    }
    let eig = SymmetricEigen::new(m.to_nalgebra());
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|k| {
            let v = eig.eigenvectors.column(k).iter().copied().collect();
            (eig.eigenvalues[k], v)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs
}

pub fn smallest_eigenvalue(m: &SquareMatrix<f64>) -> f64 {
    eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// PSD within `tol`: plain Cholesky, then a shifted retry, then the smallest
/// eigenvalue as the final word.
pub fn is_psd(m: &SquareMatrix<f64>, tol: f64) -> bool {
    if m.size() == 0 {
        return true;
    }
    if cholesky(m, 0.0).is_some() || cholesky(m, tol).is_some() {
        return true;
    }
    smallest_eigenvalue(m) >= -tol
}

pub fn rank(m: &SquareMatrix<f64>, tol: f64) -> usize {
    eigenvalues(m).iter().filter(|&&v| v > tol).count()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> SquareMatrix<f64> {
        SquareMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn cholesky_closed_form_two_by_two() {
        let l = cholesky(&mat(&[&[1.0, 0.5], &[0.5, 1.0]]), 0.0).unwrap();
        assert!((l[0] - 1.0).abs() < 1e-15);
        assert!((l[2] - 0.5).abs() < 1e-15);
        assert!((l[3] - 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn psd_predicates() {
        assert!(is_psd(&mat(&[&[1.0, -1.0], &[-1.0, 1.0]]), 1e-9));
        assert!(is_psd(&mat(&[&[1.0, 0.9], &[0.9, 1.0]]), 1e-9));
        let bad = mat(&[&[1.0, -1.0, -1.0], &[-1.0, 1.0, -1.0], &[-1.0, -1.0, 1.0]]);
        assert!(!is_psd(&bad, 1e-9));
        assert!((smallest_eigenvalue(&bad) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_counts_significant_eigenvalues() {
        assert_eq!(rank(&mat(&[&[1.0, -1.0], &[-1.0, 1.0]]), 1e-7), 1);
        assert_eq!(rank(&mat(&[&[1.0, 0.0], &[0.0, 1.0]]), 1e-7), 2);
    }
}
