//! Player 1 action sets: feasible extension columns.
//!
//! A column `g` is split into a head (entries against the basis rows of the
//! current [`FactorCache`]) and a tail (entries against every other row).
//! Heads range over `C₁^r`; the tail is then forced by the lift formula.
//! Enumeration is a depth-first search over head prefixes. Two facts make it
//! prunable:
//!
//! * the partial quadratic form `Σ_{k<t} y_k²/D_k` only grows with `t`, so a
//!   prefix whose value already exceeds `1` has no completion;
//! * by Cauchy-Schwarz the unassigned part of each tail entry is at most
//!   `sqrt(Σ_{l≥t} y_jl²/D_l) · sqrt(1 - q_t)` in absolute value, so a tail
//!   row whose reachable interval misses `C₂` rules out the prefix.
//!
//! Which heads are legal depends on the regime. With `r` the current rank,
//! `m` the row count and `n` the dimension, an extension that stays in the
//! span is allowed when `m ≥ n` or `r < m`, and one that raises the rank is
//! allowed when `r < n`. For `r = m < n` this is the "rank must become
//! `m+1`" rule, and for `r = n ≤ m` it is the unit-norm condition on the head.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::factor::{FactorCache, NormConvention};
use crate::gram::GramState;
use crate::scalar::{ArithMode, Scalar};
use crate::tolerance::Tolerances;

/// Constraint on the tail entries `g⁽²⁾`.
#[derive(Clone, Debug, PartialEq)]
pub enum TailConstraint<S> {
    /// Every tail entry must match one of these values (snapped in float mode).
    Discrete(Vec<S>),
    /// Every tail entry must be at most this value.
    Cap(S),
}

/// Structural predicate on full columns.
pub trait ColumnPredicate<S>: Send + Sync + fmt::Debug {
    fn accepts(&self, column: &[S]) -> bool;
}

/// Accepts a column when its multiset of cosines is contained in the
/// off-diagonal multiset of at least one allowed Gram row.
#[derive(Clone, Debug)]
pub struct MembershipList {
    rows: Vec<BTreeMap<i64, usize>>,
}

impl MembershipList {
    pub fn from_gram<S: Scalar>(allowed: &GramState<S>) -> Self {
        let m = allowed.count();
        let mut rows: Vec<BTreeMap<i64, usize>> = (0..m)
            .map(|i| {
                let mut counts = BTreeMap::new();
                for j in (0..m).filter(|&j| j != i) {
                    *counts.entry(allowed.get(i, j).quantize()).or_insert(0) += 1;
                }
                counts
            })
            .collect();
        rows.sort();
        rows.dedup();
        Self { rows }
    }
}

impl<S: Scalar> ColumnPredicate<S> for MembershipList {
    fn accepts(&self, column: &[S]) -> bool {
        let mut need: BTreeMap<i64, usize> = BTreeMap::new();
        for v in column {
            *need.entry(v.quantize()).or_insert(0) += 1;
        }
        self.rows.iter().any(|row| {
            need.iter()
                .all(|(k, c)| row.get(k).is_some_and(|have| have >= c))
        })
    }
}

/// Admissible cosines for a new column.
#[derive(Clone)]
pub struct ActionSpec<S> {
    c1: Vec<S>,
    c2: TailConstraint<S>,
    cstar: Option<Arc<dyn ColumnPredicate<S>>>,
}

impl<S: Scalar> fmt::Debug for ActionSpec<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ActionSpec")
            .field("c1", &self.c1)
            .field("c2", &self.c2)
            .field("cstar", &self.cstar)
            .finish()
    }
}

fn sorted_unique<S: Scalar>(mut values: Vec<S>) -> Vec<S> {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite cosines"));
    values.dedup();
    values
}

impl<S: Scalar> ActionSpec<S> {
    pub fn new(c1: Vec<S>, c2: TailConstraint<S>) -> Result<Self> {
        let lo = -S::one();
        let half = S::half();
        let c1 = sorted_unique(c1);
        if let Some(bad) = c1.iter().find(|v| **v < lo || **v > half) {
            return Err(Error::InvalidConfig(format!("C1 value {bad} outside [-1, 1/2]")));
        }
        let c2 = match c2 {
            TailConstraint::Discrete(v) => {
                let v = sorted_unique(v);
                if let Some(bad) = v.iter().find(|x| **x < lo || **x > half) {
                    return Err(Error::InvalidConfig(format!(
                        "C2 value {bad} outside [-1, 1/2]"
                    )));
                }
                TailConstraint::Discrete(v)
            }
            TailConstraint::Cap(c) => {
                if c > half {
                    return Err(Error::InvalidConfig(format!("cap {c} exceeds 1/2")));
                }
                TailConstraint::Cap(c)
            }
        };
        Ok(Self {
            c1,
            c2,
            cstar: None,
        })
    }

    /// `C₂ = C₁`.
    pub fn same(c1: Vec<S>) -> Result<Self> {
        Self::new(c1.clone(), TailConstraint::Discrete(c1))
    }

    pub fn with_predicate(mut self, predicate: Arc<dyn ColumnPredicate<S>>) -> Self {
        self.cstar = Some(predicate);
        self
    }

    pub fn c1(&self) -> &[S] {
        &self.c1
    }

    pub fn c2(&self) -> &TailConstraint<S> {
        &self.c2
    }

    pub fn has_predicate(&self) -> bool {
        self.cstar.is_some()
    }

    fn predicate_accepts(&self, column: &[S]) -> bool {
        self.cstar.as_ref().is_none_or(|p| p.accepts(column))
    }

    /// Snapped value of a tail entry, or `None` when it violates `C₂`.
    pub fn admit_tail(&self, value: &S, tol: &Tolerances) -> Option<S> {
        match &self.c2 {
            TailConstraint::Cap(cap) => value.le_tol(cap, tol.cosine_cap).then(|| value.clone()),
            TailConstraint::Discrete(set) => match S::MODE {
                ArithMode::Rational => set.iter().find(|w| *w == value).cloned(),
                ArithMode::Float => {
                    let v = value.to_f64();
                    let idx = set.partition_point(|w| w.to_f64() < v - tol.snap);
                    set.get(idx)
                        .filter(|w| (w.to_f64() - v).abs() <= tol.snap)
                        .cloned()
                }
            },
        }
    }

    /// Whether some admissible tail value lies in `[lo, hi]` (floating bounds).
    fn tail_reachable(&self, lo: f64, hi: f64, tol: &Tolerances) -> bool {
        match &self.c2 {
            TailConstraint::Cap(cap) => lo <= cap.to_f64() + tol.cosine_cap,
            TailConstraint::Discrete(set) => {
                let idx = set.partition_point(|w| w.to_f64() < lo - tol.snap);
                set.get(idx).is_some_and(|w| w.to_f64() <= hi + tol.snap)
            }
        }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Result<ActionSpec<T>>
    where
        S: 'static,
    {
        let c2 = match &self.c2 {
            TailConstraint::Discrete(v) => TailConstraint::Discrete(v.iter().map(&f).collect()),
            TailConstraint::Cap(c) => TailConstraint::Cap(f(c)),
        };
        ActionSpec::new(self.c1.iter().map(&f).collect(), c2)
    }
}

/// A feasible extension column with the data needed to update the factor
/// cache in place.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateColumn<S> {
    /// Entries against the basis rows, in pivot order.
    pub head: Vec<S>,
    /// Entries against the non-basis rows, in row order.
    pub tail: Vec<S>,
    /// The whole column in state row order.
    pub full: Vec<S>,
    /// `L⁻¹ head`.
    pub coords: Vec<S>,
    /// `1 - headᵀ B⁻¹ head`; positive exactly when the rank goes up.
    pub schur: S,
    pub rank_up: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumOptions {
    /// Keep at most this many candidates by reservoir sampling (0 = all).
    pub cap: usize,
    /// Track heads whose tail fails on exactly one row.
    pub track_conflicts: bool,
    pub convention: NormConvention,
}

impl Default for EnumOptions {
    fn default() -> Self {
        Self {
            cap: 0,
            track_conflicts: false,
            convention: NormConvention::Verbatim,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Enumeration<S> {
    /// Candidates in deterministic enumeration order.
    pub candidates: Vec<CandidateColumn<S>>,
    /// Number of feasible columns before the cap was applied.
    pub total: usize,
    /// Per state row: heads rejected by that row alone.
    pub conflicts: Vec<usize>,
}

impl<S> Enumeration<S> {
    pub fn complete(&self) -> bool {
        self.total == self.candidates.len()
    }
}

/// Regime flags for the current state.
fn allowed_moves(rank: usize, m: usize, n: usize) -> (bool, bool) {
    let in_span = m >= n || rank < m;
    let rank_up = rank < n;
    (in_span, rank_up)
}

struct Search<'a, S: Scalar, R: Rng> {
    cache: &'a FactorCache<S>,
    spec: &'a ActionSpec<S>,
    tol: &'a Tolerances,
    opts: EnumOptions,
    rng: Option<&'a mut R>,
    allow_in_span: bool,
    allow_rank_up: bool,
    q_bound: f64,
    tail_rows: Vec<usize>,
    // per tail row: floating coords and suffix sums of y_jl² / D_l
    tail_coords: Vec<Vec<f64>>,
    suffix: Vec<Vec<f64>>,
    pivots_f: Vec<f64>,
    head: Vec<S>,
    y: Vec<S>,
    out: Enumeration<S>,
    order: Vec<usize>,
}

impl<S: Scalar, R: Rng> Search<'_, S, R> {
    fn descend(&mut self, depth: usize, q: S, partial: &[f64]) {
        let r = self.cache.rank();
        if depth == r {
            self.leaf(q);
            return;
        }
        let max_viol = usize::from(self.opts.track_conflicts);
        let lower = &self.cache.lower()[depth];
        let d = &self.cache.pivots()[depth];
        let d_f = self.pivots_f[depth];
        let mut next = vec![0.0; partial.len()];
        for ci in 0..self.spec.c1.len() {
            let c = self.spec.c1[ci].clone();
            let mut yk = c.clone();
            for (l, yl) in lower.iter().zip(&self.y) {
                yk = yk - l.clone() * yl;
            }
            let q_next = q.clone() + yk.clone() * &yk / d;
            let qf = q_next.to_f64();
            let over = match S::MODE {
                ArithMode::Rational => q_next > S::one(),
                ArithMode::Float => qf > self.q_bound,
            };
            if over {
                continue;
            }
            let yk_f = yk.to_f64();
            let radius = (self.q_bound - qf).max(0.0).sqrt();
            let mut violations = 0;
            for (j, p) in partial.iter().enumerate() {
                let v = p + self.tail_coords[j][depth] * yk_f / d_f;
                next[j] = v;
                let b = self.suffix[j][depth + 1].sqrt() * radius + 1e-9 * (1.0 + v.abs());
                if !self.spec.tail_reachable(v - b, v + b, self.tol) {
                    violations += 1;
                    if violations > max_viol {
                        break;
                    }
                }
            }
            if violations > max_viol {
                continue;
            }
            self.head.push(c);
            self.y.push(yk);
            let snapshot = next.clone();
            self.descend(depth + 1, q_next, &snapshot);
            self.head.pop();
            self.y.pop();
        }
    }

    fn leaf(&mut self, q: S) {
        let schur = S::one() - q;
        let rank_up = match S::MODE {
            ArithMode::Rational => schur.is_positive(),
            ArithMode::Float => schur.exceeds(self.tol.rank),
        };
        if rank_up && !self.allow_rank_up {
            return;
        }
        if !rank_up {
            if !self.allow_in_span {
                return;
            }
            if self.opts.convention == NormConvention::InverseTranspose
                && !self
                    .cache
                    .unit_norm_test(&self.head, self.tol.unit_norm, NormConvention::InverseTranspose)
            {
                return;
            }
        }
        let mut tail = Vec::with_capacity(self.tail_rows.len());
        let mut blocker = None;
        for &row in &self.tail_rows {
            let v = self.cache.dot(self.cache.coords(row), &self.y);
            match self.spec.admit_tail(&v, self.tol) {
                Some(w) => tail.push(w),
                None => {
                    // a duplicate of an existing row is not a conflict
                    let duplicate = v.to_f64() >= 1.0 - self.tol.snap;
                    if blocker.is_some() || !self.opts.track_conflicts || duplicate {
                        return;
                    }
                    blocker = Some(row);
                    tail.push(v);
                }
            }
        }
        let mut full = vec![S::zero(); self.cache.rows()];
        for (k, &b) in self.cache.basis().iter().enumerate() {
            full[b] = self.head[k].clone();
        }
        for (v, &row) in tail.iter().zip(&self.tail_rows) {
            full[row] = v.clone();
        }
        if !self.spec.predicate_accepts(&full) {
            return;
        }
        if let Some(row) = blocker {
            self.out.conflicts[row] += 1;
            return;
        }
        let candidate = CandidateColumn {
            head: self.head.clone(),
            tail,
            full,
            coords: self.y.clone(),
            schur,
            rank_up,
        };
        self.push(candidate);
    }

    fn push(&mut self, candidate: CandidateColumn<S>) {
        let index = self.out.total;
        self.out.total += 1;
        let cap = self.opts.cap;
        if cap == 0 || self.out.candidates.len() < cap {
            self.out.candidates.push(candidate);
            self.order.push(index);
            return;
        }
        let rng = self.rng.as_mut().expect("capped enumeration needs an rng");
        let slot = rng.random_range(0..=index);
        if slot < cap {
            self.out.candidates[slot] = candidate;
            self.order[slot] = index;
        }
    }
}

/// All feasible extension columns of `state` under `spec`.
pub fn enumerate<S: Scalar, R: Rng>(
    state: &GramState<S>,
    cache: &FactorCache<S>,
    spec: &ActionSpec<S>,
    tol: &Tolerances,
    opts: EnumOptions,
    rng: Option<&mut R>,
) -> Enumeration<S> {
    let m = state.count();
    debug_assert_eq!(cache.rows(), m);
    let r = cache.rank();
    let (allow_in_span, allow_rank_up) = allowed_moves(r, m, state.dim());
    let tail_rows = cache.non_basis();
    let pivots_f: Vec<f64> = cache.pivots().iter().map(Scalar::to_f64).collect();
    let tail_coords: Vec<Vec<f64>> = tail_rows
        .iter()
        .map(|&j| cache.coords(j).iter().map(Scalar::to_f64).collect())
        .collect();
    let suffix = tail_coords
        .iter()
        .map(|c| {
            let mut s = vec![0.0; r + 1];
            for k in (0..r).rev() {
                s[k] = s[k + 1] + c[k] * c[k] / pivots_f[k];
            }
            s
        })
        .collect();
    let unit = match S::MODE {
        ArithMode::Rational => 0.0,
        ArithMode::Float => tol.unit_norm,
    };
    let mut search = Search {
        cache,
        spec,
        tol,
        opts,
        rng,
        allow_in_span,
        allow_rank_up,
        q_bound: (1.0 + unit) * (1.0 + unit),
        tail_coords,
        suffix,
        pivots_f,
        head: Vec::with_capacity(r),
        y: Vec::with_capacity(r),
        out: Enumeration {
            candidates: Vec::new(),
            total: 0,
            conflicts: vec![0; m],
        },
        order: Vec::new(),
        tail_rows,
    };
    if allow_in_span || allow_rank_up {
        let partial = vec![0.0; search.tail_rows.len()];
        search.descend(0, S::zero(), &partial);
    }
    let mut out = search.out;
    if opts.cap > 0 && out.total > opts.cap {
        let mut paired: Vec<(usize, CandidateColumn<S>)> =
            search.order.into_iter().zip(out.candidates).collect();
        paired.sort_by_key(|(i, _)| *i);
        out.candidates = paired.into_iter().map(|(_, c)| c).collect();
    }
    out
}

type NoRng = rand_chacha::ChaCha8Rng;

/// Feasible columns for `m < n`: every `g ∈ C₁^m` giving a PSD extension of
/// rank at most `n`, which must be `m + 1` when the state has full rank `m`.
pub fn enumerate_small<S: Scalar>(
    state: &GramState<S>,
    spec: &ActionSpec<S>,
    tol: &Tolerances,
) -> Result<Vec<CandidateColumn<S>>> {
    debug_assert!(state.count() < state.dim());
    let cache = FactorCache::pivoted(state, tol)?;
    Ok(enumerate::<S, NoRng>(state, &cache, spec, tol, EnumOptions::default(), None).candidates)
}

/// Feasible columns for `m ≥ n` from lifted unit-norm heads.
pub fn enumerate_lifted<S: Scalar>(
    state: &GramState<S>,
    cache: &FactorCache<S>,
    spec: &ActionSpec<S>,
    tol: &Tolerances,
) -> Vec<CandidateColumn<S>> {
    debug_assert!(state.count() >= state.dim());
    enumerate::<S, NoRng>(state, cache, spec, tol, EnumOptions::default(), None).candidates
}

/// Candidate set for one fill phase, filtered in place while every addition
/// stays inside the current span.
#[derive(Clone, Debug)]
pub struct CandidatePool<S> {
    pub candidates: Vec<CandidateColumn<S>>,
    /// False when the last enumeration was truncated by the cap.
    pub complete: bool,
}

impl<S: Scalar> CandidatePool<S> {
    pub fn enumerate<R: Rng>(
        state: &GramState<S>,
        cache: &FactorCache<S>,
        spec: &ActionSpec<S>,
        tol: &Tolerances,
        opts: EnumOptions,
        rng: &mut R,
    ) -> Self {
        let e = enumerate(state, cache, spec, tol, opts, Some(rng));
        Self {
            complete: e.complete(),
            candidates: e.candidates,
        }
    }

    /// Restricts the pool after `chosen` (an in-span column) was appended.
    /// `cache` is the factor cache before the append. Only valid without a
    /// structural predicate; callers re-enumerate otherwise.
    pub fn retain_compatible(
        &mut self,
        chosen: &CandidateColumn<S>,
        cache: &FactorCache<S>,
        spec: &ActionSpec<S>,
        tol: &Tolerances,
    ) {
        debug_assert!(!chosen.rank_up && !spec.has_predicate());
        self.candidates.retain_mut(|c| {
            let e = cache.dot(&c.coords, &chosen.coords);
            match spec.admit_tail(&e, tol) {
                Some(w) => {
                    c.tail.push(w.clone());
                    c.full.push(w);
                    true
                }
                None => false,
            }
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refconfigs::{e8_roots, generate, GeneratorId};
    use crate::scalar::Rational;
    use rand::SeedableRng;

    fn q(p: i64, d: i64) -> Rational {
        Rational::from_ratio(p, d)
    }

    fn kissing_c1() -> Vec<Rational> {
        vec![q(-1, 1), q(-1, 2), q(0, 1), q(1, 2)]
    }

    #[test]
    fn single_sphere_in_plane() {
        let s = GramState::<Rational>::single(2).unwrap();
        let spec = ActionSpec::same(kissing_c1()).unwrap();
        let cols = enumerate_small(&s, &spec, &Tolerances::default()).unwrap();
        let heads: Vec<Rational> = cols.iter().map(|c| c.full[0].clone()).collect();
        assert_eq!(heads, vec![q(-1, 2), q(0, 1), q(1, 2)]);
        assert!(cols.iter().all(|c| c.rank_up));
    }

    #[test]
    fn empty_cosine_set_gives_nothing() {
        let s = GramState::<Rational>::single(2).unwrap();
        let spec = ActionSpec::same(vec![]).unwrap();
        assert!(enumerate_small(&s, &spec, &Tolerances::default()).unwrap().is_empty());
    }

    #[test]
    fn hexagon_is_saturated() {
        let hex = generate(&GeneratorId::Hexagon).unwrap().exact_gram.unwrap();
        let t = Tolerances::default();
        let cache = FactorCache::pivoted(&hex, &t).unwrap();
        let spec = ActionSpec::same(kissing_c1()).unwrap();
        assert!(enumerate_lifted(&hex, &cache, &spec, &t).is_empty());
        let f = hex.to_float();
        let cache = FactorCache::pivoted(&f, &t).unwrap();
        let spec = spec.map(Scalar::to_f64).unwrap();
        assert!(enumerate_lifted(&f, &cache, &spec, &t).is_empty());
    }

    #[test]
    fn e8_missing_root_is_the_only_candidate() {
        let e8 = e8_roots().exact_gram.unwrap();
        let t = Tolerances::default();
        for missing in [0usize, 57, 150, 239] {
            let keep: Vec<usize> = (0..240).filter(|&i| i != missing).collect();
            let s = e8.principal(&keep);
            let cache = FactorCache::pivoted(&s, &t).unwrap();
            let spec = ActionSpec::same(kissing_c1()).unwrap();
            let cols = enumerate_lifted(&s, &cache, &spec, &t);
            assert_eq!(cols.len(), 1);
            let expected: Vec<Rational> = keep.iter().map(|&i| e8.get(i, missing).clone()).collect();
            assert_eq!(cols[0].full, expected);
        }
    }

    #[test]
    fn cap_only_tails_stay_below_half() {
        let t = Tolerances::default();
        let cube = generate(&GeneratorId::CrossPolytope(3)).unwrap().float_gram();
        let s = cube.principal(&[0, 2, 4, 1]);
        let cache = FactorCache::pivoted(&s, &t).unwrap();
        let spec = ActionSpec::new(vec![-1.0, -0.5, 0.0, 0.5], TailConstraint::Cap(0.5)).unwrap();
        let cols = enumerate_lifted(&s, &cache, &spec, &t);
        // -e2 and -e3; the head of -e1 duplicates row 3
        assert_eq!(cols.len(), 2);
        for c in &cols {
            assert!(c.tail.iter().all(|v| *v <= 0.5 + 1e-9));
            assert!(s.extend_checked(&c.full, &t).is_ok());
        }
    }

    #[test]
    fn reservoir_cap_is_deterministic_and_ordered() {
        let t = Tolerances::default();
        let s = GramState::<Rational>::rational_identity(4, 4).to_float();
        let cache = FactorCache::pivoted(&s, &t).unwrap();
        let spec = ActionSpec::same(vec![-1.0, -0.5, 0.0, 0.5]).unwrap();
        let all = enumerate_lifted(&s, &cache, &spec, &t);
        assert_eq!(all.len(), 20);
        let opts = EnumOptions {
            cap: 7,
            ..EnumOptions::default()
        };
        let run = |seed| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            enumerate(&s, &cache, &spec, &t, opts, Some(&mut rng))
        };
        let a = run(3);
        let b = run(3);
        assert_eq!(a.candidates, b.candidates);
        assert_eq!(a.total, 20);
        assert_eq!(a.candidates.len(), 7);
        let positions: Vec<usize> = a
            .candidates
            .iter()
            .map(|c| all.iter().position(|x| x == c).unwrap())
            .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn conflicts_count_single_blockers() {
        // e1, e2, -e1 in the plane: -e2 fits, the only other unit head is a
        // duplicate of -e1, which is not a conflict
        let t = Tolerances::default();
        let s = GramState::from_rows(
            2,
            vec![
                vec![q(1, 1), q(0, 1), q(-1, 1)],
                vec![q(0, 1), q(1, 1), q(0, 1)],
                vec![q(-1, 1), q(0, 1), q(1, 1)],
            ],
        )
        .unwrap();
        let cache = FactorCache::pivoted(&s, &t).unwrap();
        let spec = ActionSpec::same(kissing_c1()).unwrap();
        let opts = EnumOptions {
            track_conflicts: true,
            ..EnumOptions::default()
        };
        let e = enumerate::<Rational, NoRng>(&s, &cache, &spec, &t, opts, None);
        // only -e2 fits
        assert_eq!(e.candidates.len(), 1);
        assert_eq!(e.candidates[0].full, vec![q(0, 1), q(-1, 1), q(0, 1)]);
        assert_eq!(e.conflicts, vec![0, 0, 0]);
    }

    #[test]
    fn membership_list_filters_columns() {
        let hex = generate(&GeneratorId::Hexagon).unwrap().exact_gram.unwrap();
        let list = MembershipList::from_gram(&hex);
        assert!(ColumnPredicate::<Rational>::accepts(&list, &[q(1, 2), q(-1, 1)]));
        assert!(!ColumnPredicate::<Rational>::accepts(&list, &[q(-1, 1), q(-1, 1)]));
        assert!(!ColumnPredicate::<Rational>::accepts(&list, &[q(0, 1)]));
    }

    #[test]
    fn spec_validation() {
        assert!(ActionSpec::same(vec![0.6]).is_err());
        assert!(ActionSpec::same(vec![-1.5]).is_err());
        assert!(ActionSpec::new(vec![0.0], TailConstraint::Cap(0.7)).is_err());
        let s = ActionSpec::same(vec![0.5, -1.0, 0.5]).unwrap();
        assert_eq!(s.c1(), &[-1.0, 0.5]);
    }

    #[test]
    fn pool_filtering_matches_reenumeration() {
        let t = Tolerances::default();
        let d4 = generate(&GeneratorId::D4Roots).unwrap().exact_gram.unwrap();
        let probe = FactorCache::pivoted(&d4, &t).unwrap();
        let basis = probe.basis().to_vec();
        let mut state = d4.principal(&basis);
        let mut cache = FactorCache::pivoted(&state, &t).unwrap();
        let spec = ActionSpec::same(kissing_c1()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut pool = CandidatePool::enumerate(&state, &cache, &spec, &t, EnumOptions::default(), &mut rng);
        while let Some(chosen) = pool.candidates.first().cloned() {
            assert!(!chosen.rank_up);
            pool.retain_compatible(&chosen, &cache, &spec, &t);
            cache = cache.appended_in_span(chosen.coords.clone());
            state = state.extend(&chosen.full).unwrap();
            let fresh = enumerate_lifted(&state, &cache, &spec, &t);
            assert_eq!(pool.candidates, fresh);
        }
        assert_eq!(state.count(), 24);
    }
}
