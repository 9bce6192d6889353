//! Basis factorization of a Gram state and the lift of candidate heads.
//!
//! The basis block `B` (rows picked greedily in row order, each one kept when
//! its Schur complement against the rows already picked is significant) is
//! stored as `B = L D Lᵀ` with `L` unit lower triangular. The Cholesky factor
//! `M = L D^{1/2}` is only materialized on request, so the whole cache stays
//! rational in exact mode. Every state row `i` carries coordinates
//! `y_i = L⁻¹ G[basis, i]`; in these coordinates the cosine of two in-span
//! vectors is `Σ_k y_ik y_jk / D_k`, and the lifted tail of a head `h` is
//! `G' B⁻¹ h`, evaluated as that same sum against `L⁻¹ h`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::GramState;
use crate::matrix::SquareMatrix;
use crate::scalar::Scalar;
use crate::tolerance::Tolerances;

/// Which norm the unit condition on a head is stated in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormConvention {
    /// `‖M⁺ h‖₂ = 1`.
    #[default]
    Verbatim,
    /// `‖(Mᵀ)⁺ h‖₂ = 1`, evaluated in floating point.
    InverseTranspose,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactorCache<S> {
    basis: Vec<usize>,
    position: Vec<Option<usize>>,
    lower: Vec<Vec<S>>,
    pivots: Vec<S>,
    coords: Vec<Vec<S>>,
}

impl<S: Scalar> FactorCache<S> {
    /// Greedy rank-revealing factorization in row order.
    pub fn pivoted(state: &GramState<S>, tol: &Tolerances) -> Result<Self> {
        let mut cache = Self {
            basis: Vec::new(),
            position: Vec::with_capacity(state.count()),
            lower: Vec::new(),
            pivots: Vec::new(),
            coords: Vec::with_capacity(state.count()),
        };
        let m = state.count();
        // First pass picks the basis; second pass fills coordinates for every
        // row against the final basis.
        for i in 0..m {
            let column: Vec<S> = cache.basis.iter().map(|&b| state.get(b, i).clone()).collect();
            let y = cache.solve_lower(&column);
            let schur = S::one() - cache.quad_form(&y);
            if schur.exceeds(tol.rank) {
                cache.push_basis(i, &y, schur);
            } else if schur.to_f64() < -tol.psd.max(tol.rank) {
                return Err(Error::NotPsd);
            }
        }
        cache.position = vec![None; m];
        for (t, &b) in cache.basis.iter().enumerate() {
            cache.position[b] = Some(t);
        }
        cache.coords = (0..m)
            .map(|i| {
                let column: Vec<S> = cache.basis.iter().map(|&b| state.get(b, i).clone()).collect();
                cache.solve_lower(&column)
            })
            .collect();
        Ok(cache)
    }

    /// Factorization of the leading `dim x dim` block; fails when that block
    /// is singular.
    pub fn leading(state: &GramState<S>, tol: &Tolerances) -> Result<Self> {
        let n = state.dim();
        if state.count() < n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: state.count(),
            });
        }
        let head: Vec<usize> = (0..n).collect();
        let block = FactorCache::pivoted(&state.principal(&head), tol)?;
        if block.rank() < n {
            return Err(Error::RankDeficientBasis {
                dim: n,
                rank: block.rank(),
            });
        }
        let cache = FactorCache::pivoted(state, tol)?;
        debug_assert_eq!(cache.basis, head);
        Ok(cache)
    }

    fn push_basis(&mut self, row: usize, y: &[S], schur: S) {
        let l: Vec<S> = y
            .iter()
            .zip(&self.pivots)
            .map(|(yk, dk)| yk.clone() / dk)
            .collect();
        self.lower.push(l);
        self.pivots.push(schur);
        self.basis.push(row);
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// State indices of the basis rows, in pivot order.
    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    /// State indices outside the basis, ascending; this is the tail order.
    pub fn non_basis(&self) -> Vec<usize> {
        (0..self.position.len())
            .filter(|&i| self.position[i].is_none())
            .collect()
    }

    pub fn rows(&self) -> usize {
        self.position.len()
    }

    pub fn pivots(&self) -> &[S] {
        &self.pivots
    }

    pub fn lower(&self) -> &[Vec<S>] {
        &self.lower
    }

    /// `L⁻¹ G[basis, i]` for state row `i`.
    pub fn coords(&self, i: usize) -> &[S] {
        &self.coords[i]
    }

    pub fn is_basis(&self, i: usize) -> bool {
        self.position[i].is_some()
    }

    /// Forward substitution with the unit lower factor: returns `L⁻¹ v`.
    pub fn solve_lower(&self, v: &[S]) -> Vec<S> {
        let mut y: Vec<S> = Vec::with_capacity(v.len());
        for (k, vk) in v.iter().enumerate() {
            let mut acc = vk.clone();
            for (l, yj) in self.lower[k].iter().zip(&y) {
                acc = acc - l.clone() * yj;
            }
            y.push(acc);
        }
        y
    }

    /// `Σ_k y_k² / D_k`, i.e. `hᵀ B⁻¹ h` when `y = L⁻¹ h`.
    pub fn quad_form(&self, y: &[S]) -> S {
        y.iter()
            .zip(&self.pivots)
            .fold(S::zero(), |acc, (yk, dk)| acc + yk.clone() * yk / dk)
    }

    /// `Σ_k a_k b_k / D_k`: the cosine of two in-span vectors.
    pub fn dot(&self, a: &[S], b: &[S]) -> S {
        a.iter()
            .zip(b)
            .zip(&self.pivots)
            .fold(S::zero(), |acc, ((x, y), d)| acc + x.clone() * y / d)
    }

    /// `G' B⁺ head`, one entry per non-basis row in ascending row order.
    pub fn lift_tail(&self, head: &[S]) -> Vec<S> {
        let y = self.solve_lower(head);
        self.non_basis()
            .into_iter()
            .map(|j| self.dot(&self.coords[j], &y))
            .collect()
    }

    /// Unit-norm condition on a head, within `tol` on the norm.
    pub fn unit_norm_test(&self, head: &[S], tol: f64, convention: NormConvention) -> bool {
        let norm = match convention {
            NormConvention::Verbatim => {
                let y = self.solve_lower(head);
                self.quad_form(&y).to_f64().max(0.0).sqrt()
            }
            NormConvention::InverseTranspose => self.inverse_transpose_norm(head),
        };
        (norm - 1.0).abs() <= tol
    }

    /// Exact unit-norm test for rationals (`hᵀ B⁻¹ h == 1`); same as
    /// [`unit_norm_test`](Self::unit_norm_test) with the verbatim convention
    /// in floating mode.
    pub fn is_unit_head(&self, y: &[S], tol: f64) -> bool {
        let q = self.quad_form(y);
        match S::MODE {
            crate::scalar::ArithMode::Rational => num_traits::One::is_one(&q),
            crate::scalar::ArithMode::Float => (q.to_f64().max(0.0).sqrt() - 1.0).abs() <= tol,
        }
    }

    fn inverse_transpose_norm(&self, head: &[S]) -> f64 {
        // Solve Mᵀ x = h by back substitution with M = L D^{1/2}.
        let m = self.chol_factor();
        let r = m.len();
        let h: Vec<f64> = head.iter().map(|v| v.to_f64()).collect();
        let mut x = vec![0.0; r];
        for k in (0..r).rev() {
            let mut acc = h[k];
            for j in (k + 1)..r {
                acc -= m[j][k] * x[j];
            }
            x[k] = acc / m[k][k];
        }
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Lower-triangular Cholesky factor `M = L D^{1/2}` of the basis block.
    pub fn chol_factor(&self) -> Vec<Vec<f64>> {
        let r = self.rank();
        let sqrt_d: Vec<f64> = self.pivots.iter().map(|d| d.to_f64().max(0.0).sqrt()).collect();
        (0..r)
            .map(|i| {
                (0..r)
                    .map(|j| match j.cmp(&i) {
                        std::cmp::Ordering::Less => self.lower[i][j].to_f64() * sqrt_d[j],
                        std::cmp::Ordering::Equal => sqrt_d[i],
                        std::cmp::Ordering::Greater => 0.0,
                    })
                    .collect()
            })
            .collect()
    }

    /// Inverse of the basis block, `L⁻ᵀ D⁻¹ L⁻¹`, which is its pseudo-inverse
    /// because the block is nonsingular.
    pub fn basis_pinv(&self) -> SquareMatrix<S> {
        let r = self.rank();
        let mut out = SquareMatrix::from_row_major(r, vec![S::zero(); r * r]).expect("square");
        for c in 0..r {
            let mut e = vec![S::zero(); r];
            e[c] = S::one();
            let y = self.solve_lower(&e);
            let z: Vec<S> = y.iter().zip(&self.pivots).map(|(a, d)| a.clone() / d).collect();
            // back substitution with Lᵀ
            let mut x = z.clone();
            for k in (0..r).rev() {
                let mut acc = z[k].clone();
                for j in (k + 1)..r {
                    acc = acc - self.lower[j][k].clone() * &x[j];
                }
                x[k] = acc;
            }
            for (row, v) in x.into_iter().enumerate() {
                out.set(row, c, v);
            }
        }
        out
    }

    pub fn basis_block(&self, state: &GramState<S>) -> SquareMatrix<S> {
        state.entries().principal(&self.basis)
    }

    /// `G'`: non-basis rows against basis columns.
    pub fn cross_block(&self, state: &GramState<S>) -> Vec<Vec<S>> {
        self.non_basis()
            .into_iter()
            .map(|j| self.basis.iter().map(|&b| state.get(j, b).clone()).collect())
            .collect()
    }

    /// Cache after appending a row that lies in the current span.
    pub fn appended_in_span(&self, y: Vec<S>) -> Self {
        let mut next = self.clone();
        next.position.push(None);
        next.coords.push(y);
        next
    }

    /// Cache after appending a row that raises the rank; `column` is the new
    /// row's cosines against all existing rows.
    pub fn appended_rank_up(&self, y: &[S], schur: S, column: &[S]) -> Self {
        let mut next = self.clone();
        let row = next.position.len();
        next.push_basis(row, y, schur.clone());
        let l_new = next.lower.last().expect("just pushed").clone();
        for (i, c) in next.coords.iter_mut().enumerate() {
            let inner = l_new
                .iter()
                .zip(c.iter())
                .fold(S::zero(), |acc, (l, v)| acc + l.clone() * v);
            c.push(column[i].clone() - inner);
        }
        let mut own = y.to_vec();
        own.push(schur);
        next.coords.push(own);
        next.position.push(Some(next.basis.len() - 1));
        next
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::refconfigs::{e8_roots, generate, GeneratorId};
    use crate::scalar::Rational;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn identity_basis() {
        let g = GramState::<Rational>::rational_identity(3, 3).to_float();
        let c = FactorCache::leading(&g, &tol()).unwrap();
        let m = c.chol_factor();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m[i][j], if i == j { 1.0 } else { 0.0 });
            }
        }
        let p = c.basis_pinv();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(*p.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
        assert!(c.lift_tail(&[1.0, 0.0, 0.0]).is_empty());
    }

    #[test]
    fn two_by_two_cholesky_closed_form() {
        let g = GramState::from_rows(2, vec![vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let c = FactorCache::leading(&g, &tol()).unwrap();
        let m = c.chol_factor();
        assert!((m[0][0] - 1.0).abs() < 1e-15);
        assert!((m[1][0] - 0.5).abs() < 1e-15);
        assert!((m[1][1] - 3f64.sqrt() / 2.0).abs() < 1e-15);
        // ‖M⁺[1/2,1/2]‖ = 1/√3
        assert!(!c.unit_norm_test(&[0.5, 0.5], 1e-7, NormConvention::Verbatim));
        let y = c.solve_lower(&[0.5, 0.5]);
        assert!((c.quad_form(&y) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn unit_norm_identity_basis() {
        let g = GramState::<Rational>::rational_identity(3, 3).to_float();
        let c = FactorCache::leading(&g, &tol()).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!(c.unit_norm_test(&[s, s, s], 1e-9, NormConvention::Verbatim));
        assert!(!c.unit_norm_test(&[0.0, 0.0, 0.0], 1e-9, NormConvention::Verbatim));
        assert!(c.unit_norm_test(&[s, s, s], 1e-9, NormConvention::InverseTranspose));
    }

    #[test]
    fn identity_basis_single_cross_row() {
        // basis e1, e2 and a third row r = (0.6, 0.8) -> tail = r·head
        let g = GramState::from_rows(
            2,
            vec![vec![1.0, 0.0, 0.6], vec![0.0, 1.0, 0.8], vec![0.6, 0.8, 1.0]],
        )
        .unwrap();
        let c = FactorCache::leading(&g, &tol()).unwrap();
        let tail = c.lift_tail(&[0.3, -0.2]);
        assert!((tail[0] - (0.6 * 0.3 - 0.8 * 0.2)).abs() < 1e-15);
    }

    #[test]
    fn leading_block_rank_deficient() {
        let g = GramState::from_rows(
            2,
            vec![vec![1.0, -1.0, 0.0], vec![-1.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
        )
        .unwrap();
        assert!(matches!(
            FactorCache::leading(&g, &tol()),
            Err(Error::RankDeficientBasis { dim: 2, rank: 1 })
        ));
        let p = FactorCache::pivoted(&g, &tol()).unwrap();
        assert_eq!(p.basis(), &[0, 2]);
    }

    #[test]
    fn d4_reconstruction_and_pinv() {
        let d4 = generate(&GeneratorId::D4Roots).unwrap();
        // reorder so that the leading block is a basis
        let g = d4.float_gram();
        let probe = FactorCache::pivoted(&g, &tol()).unwrap();
        let mut order: Vec<usize> = probe.basis().to_vec();
        order.extend(probe.non_basis());
        let g = g.permuted(&order);
        let c = FactorCache::leading(&g, &tol()).unwrap();
        let m = c.chol_factor();
        let b = c.basis_block(&g);
        for i in 0..4 {
            for j in 0..4 {
                let mm: f64 = (0..4).map(|k| m[i][k] * m[j][k]).sum();
                assert!((mm - b.get(i, j)).abs() < 1e-12);
            }
        }
        let p = c.basis_pinv();
        // B P B = B
        for i in 0..4 {
            for j in 0..4 {
                let mut s = 0.0;
                for k in 0..4 {
                    for l in 0..4 {
                        s += b.get(i, k) * p.get(k, l) * b.get(l, j);
                    }
                }
                assert!((s - b.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn e8_lift_matches_direct_dot_products() {
        let e8 = e8_roots();
        let g = e8.float_gram();
        let probe = FactorCache::pivoted(&g, &tol()).unwrap();
        let basis = probe.basis().to_vec();
        assert_eq!(basis.len(), 8);
        // keep the basis plus 100 other roots; lift a held-out root
        let held_out = (0..240).rev().find(|i| !basis.contains(i)).unwrap();
        let mut keep = basis.clone();
        keep.extend((0..240).filter(|i| !basis.contains(i) && *i != held_out).take(100));
        let sub = g.principal(&keep);
        let c = FactorCache::leading(&sub, &tol()).unwrap();
        let head: Vec<f64> = basis.iter().map(|&b| linalg::dot(&e8.vectors[b], &e8.vectors[held_out])).collect();
        let tail = c.lift_tail(&head);
        assert_eq!(tail.len(), 100);
        let mut worst: f64 = 0.0;
        for (t, &row) in tail.iter().zip(&keep[8..]) {
            let direct = linalg::dot(&e8.vectors[row], &e8.vectors[held_out]);
            worst = worst.max((t - direct).abs());
        }
        assert!(worst < 1e-10, "max error {worst}");
        assert!(c.unit_norm_test(&head, 1e-9, NormConvention::Verbatim));
    }

    #[test]
    fn exact_cache_on_rational_hexagon() {
        let hex = generate(&GeneratorId::Hexagon).unwrap().exact_gram.unwrap();
        let c = FactorCache::pivoted(&hex, &tol()).unwrap();
        assert_eq!(c.rank(), 2);
        assert_eq!(c.pivots()[1], Rational::from_ratio(3, 4));
        let tail = c.lift_tail(&[hex.get(0, 3).clone(), hex.get(1, 3).clone()]);
        let expected: Vec<Rational> = c.non_basis().iter().map(|&j| hex.get(j, 3).clone()).collect();
        assert_eq!(tail, expected);
    }

    #[test]
    fn incremental_appends_match_refactorization() {
        let d4 = generate(&GeneratorId::D4Roots).unwrap().exact_gram.unwrap();
        let order = [0usize, 5, 9, 14, 2, 23, 17];
        let mut state = d4.principal(&order[..1]);
        let mut cache = FactorCache::pivoted(&state, &tol()).unwrap();
        for k in 1..order.len() {
            let column: Vec<Rational> = order[..k].iter().map(|&i| d4.get(i, order[k]).clone()).collect();
            let head: Vec<Rational> = cache.basis().iter().map(|&b| column[b].clone()).collect();
            let y = cache.solve_lower(&head);
            let schur = Rational::from_ratio(1, 1) - cache.quad_form(&y);
            cache = if schur.exceeds(0.0) {
                cache.appended_rank_up(&y, schur, &column)
            } else {
                cache.appended_in_span(y)
            };
            state = state.extend(&column).unwrap();
            let fresh = FactorCache::pivoted(&state, &tol()).unwrap();
            assert_eq!(cache, fresh);
        }
    }
}
