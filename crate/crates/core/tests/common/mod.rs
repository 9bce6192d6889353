//! Shared oracles for the integration tests.
//!
//! The filler oracle accepts every column in `C1^m` whose bordered Gram
//! matrix is PSD with rank exactly `m + 1` (for `m < n`) or at most `n` (for
//! `m >= n`), decided by a dense eigendecomposition.
#![allow(dead_code)]

use std::collections::BTreeSet;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kissing_core::factor::FactorCache;
use kissing_core::filler::{enumerate, ActionSpec, EnumOptions};
use kissing_core::{GramState, Rational, Scalar, Tolerances};

const POOL: [(i64, i64); 10] = [(-1, 1), (-3, 4), (-2, 3), (-1, 2), (-1, 3), (-1, 4), (0, 1), (1, 4), (1, 3), (1, 2)];

pub fn feasible(gram: &[Vec<f64>], column: &[f64], dim: usize) -> bool {
    let m = gram.len();
    let mut a = DMatrix::<f64>::identity(m + 1, m + 1);
    for i in 0..m {
        for j in 0..m {
            a[(i, j)] = gram[i][j];
        }
        a[(i, m)] = column[i];
        a[(m, i)] = column[i];
    }
    let eig = SymmetricEigen::new(a).eigenvalues;
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let rank = eig.iter().filter(|&&v| v > 1e-7).count();
    let rank_ok = if m < dim { rank == m + 1 } else { rank <= dim };
    min >= -1e-9 && rank_ok
}

pub fn all_columns(c1: &[f64], m: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                c1.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

pub fn oracle(gram: &[Vec<f64>], dim: usize, c1: &[f64]) -> BTreeSet<Vec<i64>> {
    all_columns(c1, gram.len())
        .into_iter()
        .filter(|g| feasible(gram, g, dim))
        .map(|g| key(&g))
        .collect()
}

pub fn key(column: &[f64]) -> Vec<i64> {
    column.iter().map(|v| (v * 1e9).round() as i64).collect()
}

pub fn rows(state: &GramState<Rational>) -> Vec<Vec<f64>> {
    (0..state.count())
        .map(|i| state.row(i).iter().map(Scalar::to_f64).collect())
        .collect()
}

pub fn filler_columns<S: Scalar>(state: &GramState<S>, spec: &ActionSpec<S>) -> (BTreeSet<Vec<i64>>, usize) {
    let tol = Tolerances::default();
    let cache = FactorCache::pivoted(state, &tol).unwrap();
    let opts = EnumOptions { cap: 0, ..EnumOptions::default() };
    let out = enumerate::<S, ChaCha8Rng>(state, &cache, spec, &tol, opts, None);
    let n = out.candidates.len();
    let set = out
        .candidates
        .iter()
        .map(|c| key(&c.full.iter().map(Scalar::to_f64).collect::<Vec<_>>()))
        .collect();
    (set, n)
}

/// States along a random growth path by oracle-feasible columns, up to `m` rows.
pub fn random_path(dim: usize, c1: &[Rational], m: usize, rng: &mut ChaCha8Rng) -> Vec<GramState<Rational>> {
    let mut state = GramState::<Rational>::single(dim).unwrap();
    let mut path = vec![state.clone()];
    let c1_f: Vec<f64> = c1.iter().map(Scalar::to_f64).collect();
    while state.count() < m {
        let gram = rows(&state);
        let options: Vec<Vec<f64>> = all_columns(&c1_f, gram.len())
            .into_iter()
            .filter(|g| feasible(&gram, g, dim))
            .collect();
        let Some(pick) = options.choose(rng) else { break };
        let column: Vec<Rational> = pick
            .iter()
            .map(|v| c1[c1_f.iter().position(|c| c == v).unwrap()].clone())
            .collect();
        state = state.extend(&column).unwrap();
        path.push(state.clone());
    }
    path
}

#[derive(Debug, Default)]
pub struct BruteForceSummary {
    pub cases: usize,
    pub nonempty: usize,
    pub saturated: usize,
    pub mismatches: Vec<String>,
}

/// Runs the filler in both arithmetic modes on every state along `paths`
/// random growth paths and compares with the oracle.
pub fn brute_force_cases(paths: usize, seed: u64) -> BruteForceSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = 0;
    let mut nonempty = 0;
    let mut saturated = 0;
    let mut mismatches = Vec::new();
    for case in 0..paths {
        let dim = 1 + case % 3;
        let size = rng.random_range(1..=5);
        let mut picked: Vec<(i64, i64)> = Vec::new();
        // favour the half-angle values that real kissing configurations use
        for half in [(1, 2), (-1, 2)] {
            if rng.random_bool(0.6) {
                picked.push(half);
            }
        }
        let mut pool = POOL.to_vec();
        pool.shuffle(&mut rng);
        for v in pool {
            if picked.len() < size && !picked.contains(&v) {
                picked.push(v);
            }
        }
        picked.truncate(size);
        let c1: Vec<Rational> = picked.iter().map(|&(p, q)| Rational::from_ratio(p, q)).collect();
        let m = rng.random_range(1..=6);
        for state in random_path(dim, &c1, m, &mut rng) {
            let expected = oracle(&rows(&state), dim, &c1.iter().map(Scalar::to_f64).collect::<Vec<_>>());

            let spec = ActionSpec::same(c1.clone()).unwrap();
            let (exact, exact_len) = filler_columns(&state, &spec);
            if exact != expected || exact_len != exact.len() {
                mismatches.push(format!("rational mode, path {case}, C1 {c1:?}, state {state:?}"));
            }

            let float_state = state.to_float();
            let float_spec = ActionSpec::same(c1.iter().map(Scalar::to_f64).collect()).unwrap();
            let (float, _) = filler_columns(&float_state, &float_spec);
            if float != expected {
                mismatches.push(format!("float mode, path {case}, C1 {c1:?}, state {state:?}"));
            }

            cases += 1;
            nonempty += usize::from(!expected.is_empty());
            saturated += usize::from(state.count() >= dim && !expected.is_empty());
        }
    }
    BruteForceSummary { cases, nonempty, saturated, mismatches }
}
