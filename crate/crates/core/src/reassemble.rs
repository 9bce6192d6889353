//! Round-boundary restructuring: detect a cross-polytope frame and move it
//! into the protected prefix.
//!
//! A frame is a set of antipodal pairs whose members are orthogonal across
//! pairs. The largest one is found by branch and bound over the pair
//! compatibility graph, stopping early at `dim` pairs.

use crate::gram::GramState;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnalysisSpec {
    /// Smallest frame worth protecting, in antipodal pairs.
    pub min_pairs: usize,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        Self { min_pairs: 2 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reassembly<S: Scalar> {
    pub state: GramState<S>,
    /// New row `k` is old row `permutation[k]`.
    pub permutation: Vec<usize>,
    pub protected: usize,
    /// Rows of the detected frame, in their new positions `0..frame.len()`.
    pub frame: Vec<usize>,
}

fn is_value<S: Scalar>(v: &S, target: &S, tol: f64) -> bool {
    v.approx_eq(target, tol)
}

/// Largest cross-polytope frame, as old row indices `[a1, b1, a2, b2, ...]`.
pub fn find_frame<S: Scalar>(state: &GramState<S>, tol: f64) -> Vec<usize> {
    let m = state.count();
    let minus_one = -S::one();
    let zero = S::zero();
    let mut pairs = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            if is_value(state.get(i, j), &minus_one, tol) {
                pairs.push((i, j));
            }
        }
    }
    let compatible = |a: (usize, usize), b: (usize, usize)| {
        [a.0, a.1].iter().all(|&x| {
            [b.0, b.1]
                .iter()
                .all(|&y| is_value(state.get(x, y), &zero, tol))
        })
    };
    let p = pairs.len();
    let adj: Vec<Vec<bool>> = (0..p)
        .map(|a| (0..p).map(|b| a != b && compatible(pairs[a], pairs[b])).collect())
        .collect();
    let mut best: Vec<usize> = Vec::new();
    let mut current = Vec::new();
    let candidates: Vec<usize> = (0..p).collect();
    clique(&adj, &mut current, &candidates, &mut best, state.dim());
    best.into_iter().flat_map(|k| [pairs[k].0, pairs[k].1]).collect()
}

fn clique(
    adj: &[Vec<bool>],
    current: &mut Vec<usize>,
    candidates: &[usize],
    best: &mut Vec<usize>,
    limit: usize,
) {
    if current.len() > best.len() {
        *best = current.clone();
    }
    if best.len() >= limit {
        return;
    }
    for (idx, &v) in candidates.iter().enumerate() {
        if current.len() + candidates.len() - idx <= best.len() {
            return;
        }
        let next: Vec<usize> = candidates[idx + 1..]
            .iter()
            .copied()
            .filter(|&u| adj[v][u])
            .collect();
        current.push(v);
        clique(adj, current, &next, best, limit);
        current.pop();
        if best.len() >= limit {
            return;
        }
    }
}

/// Moves the largest frame (if any) to the front and protects it along with
/// the previously protected rows. The row multiset is unchanged.
pub fn decompose_reassemble<S: Scalar>(
    state: &GramState<S>,
    protected: usize,
    spec: &AnalysisSpec,
    tol: f64,
) -> Reassembly<S> {
    let m = state.count();
    let frame = find_frame(state, tol);
    if frame.len() < 2 * spec.min_pairs.max(1) {
        return Reassembly {
            state: state.clone(),
            permutation: (0..m).collect(),
            protected,
            frame: Vec::new(),
        };
    }
    let mut placed = vec![false; m];
    let mut permutation = Vec::with_capacity(m);
    for &i in &frame {
        placed[i] = true;
        permutation.push(i);
    }
    for i in 0..protected.min(m) {
        if !placed[i] {
            placed[i] = true;
            permutation.push(i);
        }
    }
    let new_protected = permutation.len();
    permutation.extend((0..m).filter(|&i| !placed[i]));
    Reassembly {
        state: state.permuted(&permutation),
        protected: new_protected,
        frame: (0..frame.len()).collect(),
        permutation,
    }
}
