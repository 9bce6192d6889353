//! Exact LDLᵀ certification and exact rank for rational matrices.

use num_traits::{Signed, Zero};

use crate::matrix::SquareMatrix;
use crate::scalar::Rational;

#[derive(Clone, Debug, PartialEq)]
pub struct LdltCertificate {
    pub psd: bool,
    pub rank: usize,
    /// Pivots in elimination order, up to the point where the verdict was settled.
    pub pivots: Vec<Rational>,
}

/// Symmetric-pivoted LDLᵀ, always pivoting on the largest remaining diagonal.
///
/// A negative pivot, or a zero diagonal whose row is not identically zero,
/// certifies indefiniteness. For indefinite input the rank comes from exact
/// Gaussian elimination instead of the (incomplete) pivot count.
pub fn exact_ldlt(m: &SquareMatrix<Rational>) -> LdltCertificate {
    let n = m.size();
    let mut a: Vec<Vec<Rational>> = m.rows().map(|r| r.to_vec()).collect();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut pivots = Vec::new();

    while !remaining.is_empty() {
        let (pos, &p) = remaining
            .iter()
            .enumerate()
            .max_by(|(_, &i), (_, &j)| a[i][i].cmp(&a[j][j]))
            .expect("nonempty");
        let pivot = a[p][p].clone();
        if pivot.is_negative() {
            pivots.push(pivot);
            return indefinite(m, pivots);
        }
        if pivot.is_zero() {
            let nonzero_left = remaining
                .iter()
                .any(|&i| remaining.iter().any(|&j| !a[i][j].is_zero()));
            if nonzero_left {
                return indefinite(m, pivots);
            }
            break;
        }
        remaining.swap_remove(pos);
        for &i in &remaining {
            if a[i][p].is_zero() {
                continue;
            }
            let factor = &a[i][p] / &pivot;
            for &j in &remaining {
                if a[p][j].is_zero() {
                    continue;
                }
                let delta = &factor * &a[p][j];
                a[i][j] -= delta;
            }
        }
        pivots.push(pivot);
    }

    let rank = pivots.iter().filter(|p| !p.is_zero()).count();
    LdltCertificate {
        psd: true,
        rank,
        pivots,
    }
}

fn indefinite(m: &SquareMatrix<Rational>, pivots: Vec<Rational>) -> LdltCertificate {
    LdltCertificate {
        psd: false,
        rank: exact_rank(m),
        pivots,
    }
}

/// Rank by exact Gaussian elimination with first-nonzero pivoting.
pub fn exact_rank(m: &SquareMatrix<Rational>) -> usize {
    let n = m.size();
    let mut a: Vec<Vec<Rational>> = m.rows().map(|r| r.to_vec()).collect();
    let mut rank = 0;
    for col in 0..n {
        let Some(pivot_row) = (rank..n).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, pivot_row);
        let pivot = a[rank][col].clone();
        for r in (rank + 1)..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &pivot;
            for c in col..n {
                let delta = &factor * &a[rank][c];
                a[r][c] -= delta;
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn q(p: i64, d: i64) -> Rational {
        Rational::from_ratio(p, d)
    }

    fn mat(rows: Vec<Vec<Rational>>) -> SquareMatrix<Rational> {
        SquareMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn two_by_two_cases() {
        let c = exact_ldlt(&mat(vec![vec![q(1, 1), q(1, 2)], vec![q(1, 2), q(1, 1)]]));
        assert!(c.psd);
        assert_eq!(c.rank, 2);
        assert_eq!(c.pivots, vec![q(1, 1), q(3, 4)]);

        let c = exact_ldlt(&mat(vec![vec![q(1, 1), q(-1, 1)], vec![q(-1, 1), q(1, 1)]]));
        assert!(c.psd);
        assert_eq!(c.rank, 1);
    }

    #[test]
    fn three_by_three_minus_three_quarters_is_indefinite() {
        // det = 1 - 3a^2 + 2a^3 = -49/32 with a = -3/4, so some pivot is negative.
        let off = q(-3, 4);
        let m = mat(vec![
            vec![q(1, 1), off.clone(), off.clone()],
            vec![off.clone(), q(1, 1), off.clone()],
            vec![off.clone(), off.clone(), q(1, 1)],
        ]);
        let det_by_hand = q(1, 1) - q(3, 1) * q(9, 16) + q(2, 1) * (&off * &off * &off);
        assert_eq!(det_by_hand, q(-49, 32));
        let c = exact_ldlt(&m);
        assert!(!c.psd);
        assert_eq!(c.rank, 3);
    }

    #[test]
    fn zero_diagonal_with_offdiagonal_is_indefinite() {
        let m = mat(vec![vec![q(0, 1), q(1, 1)], vec![q(1, 1), q(0, 1)]]);
        let c = exact_ldlt(&m);
        assert!(!c.psd);
        assert_eq!(c.rank, 2);
    }

    #[test]
    fn exact_rank_of_dependent_rows() {
        let m = mat(vec![
            vec![q(1, 1), q(-1, 1), q(0, 1)],
            vec![q(-1, 1), q(1, 1), q(0, 1)],
            vec![q(0, 1), q(0, 1), q(1, 1)],
        ]);
        assert_eq!(exact_rank(&m), 2);
        assert_eq!(exact_ldlt(&m).rank, 2);
    }
}
