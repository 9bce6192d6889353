//! Cosine-set discovery by tangent-sphere simulation.
//!
//! Starting from a seed configuration, each step picks `n - 1` existing
//! centers and solves for the unit vectors at cosine 1/2 to all of them.
//! A search tree over configurations chooses among feasible solutions, the
//! final sphere count is backpropagated, and the pairwise cosines of the
//! finished configurations with the largest count go into a histogram. Values that recur above a
//! noise floor in both halves of the run form the cosine set.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cosines::{snap_cosine, ExactCosine};
use crate::error::{Error, Result};
use crate::fingerprint::RowSignatures;
use crate::linalg::{dot, eigenpairs_descending, norm};
use crate::matrix::SquareMatrix;
use crate::tree::SearchTree;

/// Combinations tried per step before switching to random sampling.
pub const COMBINATION_CAP: usize = 512;
/// Histogram keys are cosines rounded to this many decimal places.
pub const HISTOGRAM_DIGITS: i32 = 9;
/// Minimum share of all samples for a value to count.
pub const NOISE_FLOOR: f64 = 0.005;
/// Snapping radius for exact forms.
pub const SNAP_TOL: f64 = 1e-6;

const CAP_TOL: f64 = 1e-9;
const SOLVE_TOL: f64 = 1e-9;
const HASH_SCALE: f64 = 1e6;

/// Linear system `A x = b / 2` for a sphere tangent to `n - 1` centers.
#[derive(Clone, Debug)]
pub struct TangentSystem {
    pub basis: Vec<Vec<f64>>,
    pub particular: Vec<f64>,
    /// Orthonormal basis of `ker A`.
    pub kernel: Vec<Vec<f64>>,
}

impl TangentSystem {
    /// Requires full row rank.
    pub fn new(centers: &[Vec<f64>], dim: usize, tol: f64) -> Result<Self> {
        let k = centers.len();
        if let Some(bad) = centers.iter().find(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, actual: bad.len() });
        }
        let mut aat = SquareMatrix::zeros(k);
        for i in 0..k {
            for j in 0..k {
                aat.set(i, j, dot(&centers[i], &centers[j]));
            }
        }
        let pairs = eigenpairs_descending(&aat);
        let rank = pairs.iter().filter(|(v, _)| *v > tol).count();
        if rank < k {
            return Err(Error::RankDeficient { rank, needed: k });
        }
        // particular = A^T (A A^T)^{-1} b, with b = 1/2
        let mut weights = vec![0.0; k];
        for (value, vector) in &pairs {
            let coef = 0.5 * vector.iter().sum::<f64>() / value;
            for (w, v) in weights.iter_mut().zip(vector) {
                *w += coef * v;
            }
        }
        let mut particular = vec![0.0; dim];
        for (w, c) in weights.iter().zip(centers) {
            for (p, x) in particular.iter_mut().zip(c) {
                *p += w * x;
            }
        }
        let mut ata = SquareMatrix::zeros(dim);
        for a in 0..dim {
            for b in 0..dim {
                ata.set(a, b, centers.iter().map(|c| c[a] * c[b]).sum());
            }
        }
        let kernel = eigenpairs_descending(&ata)
            .into_iter()
            .skip(k)
            .map(|(_, v)| v)
            .collect();
        Ok(Self { basis: centers.to_vec(), particular, kernel })
    }

    fn radius(&self, tol: f64) -> Option<f64> {
        let r2 = 1.0 - dot(&self.particular, &self.particular);
        if r2 < -tol {
            None
        } else {
            Some(r2.max(0.0).sqrt())
        }
    }

    fn point(&self, radius: f64, direction: &[f64]) -> Vec<f64> {
        let mut x = self.particular.clone();
        for (xi, di) in x.iter_mut().zip(direction) {
            *xi += radius * di;
        }
        x
    }
}

/// Unit vectors at cosine 1/2 to each of `n - 1` centers: none, one
/// (tangent) or two mirror images.
pub fn solve_tangent(centers: &[Vec<f64>], tol: f64) -> Result<Vec<Vec<f64>>> {
    let dim = centers.len() + 1;
    let system = TangentSystem::new(centers, dim, tol)?;
    let Some(radius) = system.radius(tol) else {
        return Ok(Vec::new());
    };
    let z = &system.kernel[0];
    if radius <= tol {
        return Ok(vec![system.particular.clone()]);
    }
    let minus: Vec<f64> = z.iter().map(|v| -v).collect();
    Ok(vec![system.point(radius, z), system.point(radius, &minus)])
}

/// Random point at cosine 1/2 to fewer than `dim - 1` centers.
fn random_tangent<R: Rng>(centers: &[Vec<f64>], dim: usize, rng: &mut R) -> Result<Option<Vec<f64>>> {
    let system = TangentSystem::new(centers, dim, SOLVE_TOL)?;
    let Some(radius) = system.radius(SOLVE_TOL) else {
        return Ok(None);
    };
    let mut direction = vec![0.0; dim];
    for basis in &system.kernel {
        let c: f64 = rng.random_range(-1.0..1.0);
        for (d, b) in direction.iter_mut().zip(basis) {
            *d += c * b;
        }
    }
    let len = norm(&direction);
    if len < 1e-6 {
        return Ok(None);
    }
    direction.iter_mut().for_each(|d| *d /= len);
    Ok(Some(system.point(radius, &direction)))
}

fn max_cosine_with(centers: &[Vec<f64>], x: &[f64]) -> f64 {
    centers.iter().map(|c| dot(c, x)).fold(f64::NEG_INFINITY, f64::max)
}

/// Grows `seed` to `dim - 1` vectors by random tangent placements.
pub fn grow_seed<R: Rng>(seed: &[Vec<f64>], dim: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    let mut centers = seed.to_vec();
    if centers.is_empty() {
        let mut e1 = vec![0.0; dim];
        e1[0] = 1.0;
        centers.push(e1);
    }
    let mut attempts = 0;
    while centers.len() + 1 < dim {
        attempts += 1;
        if attempts > 1000 {
            return Err(Error::InvalidSeed("could not grow the seed configuration".into()));
        }
        if let Some(x) = random_tangent(&centers, dim, rng)? {
            if max_cosine_with(&centers, &x) <= 0.5 + CAP_TOL {
                centers.push(x);
            }
        }
    }
    Ok(centers)
}

/// Cosine occurrence counts, split by run half.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CosineHistogram {
    /// Key is the cosine times `10^9`, rounded.
    pub bins: BTreeMap<i64, [u64; 2]>,
    pub total_samples: u64,
}

impl CosineHistogram {
    pub fn key(value: f64) -> i64 {
        (value * 10f64.powi(HISTOGRAM_DIGITS)).round() as i64
    }

    pub fn record(&mut self, value: f64, half: usize) {
        self.bins.entry(Self::key(value)).or_insert([0, 0])[half] += 1;
        self.total_samples += 1;
    }

    pub fn merge(&mut self, other: &CosineHistogram) {
        for (k, c) in &other.bins {
            let e = self.bins.entry(*k).or_insert([0, 0]);
            e[0] += c[0];
            e[1] += c[1];
        }
        self.total_samples += other.total_samples;
    }

    /// Bins grouped by exact form, so rounding noise does not split a value.
    pub fn grouped(&self) -> Vec<CosineValue> {
        let mut groups: Vec<CosineValue> = Vec::new();
        for (&key, counts) in &self.bins {
            let value = key as f64 / 10f64.powi(HISTOGRAM_DIGITS);
            let exact = snap_cosine(value, SNAP_TOL);
            let existing = groups.iter_mut().find(|g| match (&g.exact, &exact) {
                (Some(a), Some(b)) => a == b,
                _ => false,
            });
            match existing {
                Some(g) => {
                    g.halves[0] += counts[0];
                    g.halves[1] += counts[1];
                }
                None => groups.push(CosineValue {
                    value: exact.as_ref().map_or(value, ExactCosine::value),
                    exact,
                    halves: *counts,
                }),
            }
        }
        groups.sort_by(|a, b| a.value.total_cmp(&b.value));
        groups
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CosineValue {
    pub value: f64,
    pub exact: Option<ExactCosine>,
    /// Counts in the first and second half of the run.
    pub halves: [u64; 2],
}

impl CosineValue {
    pub fn count(&self) -> u64 {
        self.halves[0] + self.halves[1]
    }

    pub fn stable(&self) -> bool {
        self.halves[0] > 0 && self.halves[1] > 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CosineSet {
    pub dim: usize,
    /// Values above the noise floor, ascending.
    pub values: Vec<CosineValue>,
    pub histogram: CosineHistogram,
    pub episodes: usize,
    pub placements: usize,
    pub best_count: usize,
    /// The above-floor sets of both halves agree.
    pub converged: bool,
}

impl CosineSet {
    /// Stable values above the floor: the recovered cosine set.
    pub fn set(&self) -> Vec<&CosineValue> {
        self.values.iter().filter(|v| v.stable()).collect()
    }

    pub fn set_values(&self) -> Vec<f64> {
        self.set().iter().map(|v| v.value).collect()
    }
}

#[derive(Clone, Debug)]
pub struct SimulationOptions {
    pub budget: usize,
    pub exploration: f64,
    pub rng_seed: u64,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self { budget: 10_000, exploration: std::f64::consts::SQRT_2, rng_seed: 0 }
    }
}

fn quantized(x: f64) -> i64 {
    (x * HASH_SCALE).round() as i64
}

fn signatures(centers: &[Vec<f64>]) -> RowSignatures {
    RowSignatures::from_quantized(centers.len(), |i, j| quantized(dot(&centers[i], &centers[j])))
}

fn combinations(m: usize, k: usize) -> usize {
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (m - i) as u128 / (i + 1) as u128;
        if c > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    c as usize
}

fn all_combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > m {
        return out;
    }
    loop {
        out.push(idx.clone());
        let Some(pos) = (0..k).rev().find(|&i| idx[i] != i + m - k) else {
            return out;
        };
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Feasible tangent placements for the current configuration, deduplicated.
fn candidates<R: Rng>(centers: &[Vec<f64>], dim: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let m = centers.len();
    let k = dim - 1;
    let combos = if combinations(m, k) <= COMBINATION_CAP {
        all_combinations(m, k)
    } else {
        (0..COMBINATION_CAP)
            .map(|_| {
                let mut c = sample(rng, m, k).into_vec();
                c.sort_unstable();
                c
            })
            .collect()
    };
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for combo in combos {
        let chosen: Vec<Vec<f64>> = combo.iter().map(|&i| centers[i].clone()).collect();
        let Ok(solutions) = solve_tangent(&chosen, SOLVE_TOL) else {
            continue;
        };
        for x in solutions {
            if max_cosine_with(centers, &x) > 0.5 + CAP_TOL {
                continue;
            }
            let key: Vec<i64> = x.iter().map(|&v| quantized(v)).collect();
            if seen.insert(key) {
                out.push(x);
            }
        }
    }
    out
}

/// Runs the tangent-placement search for `budget` placements and extracts
/// the recurring cosine values.
pub fn simulate_cosine_set(
    dim: usize,
    seed: &[Vec<f64>],
    options: &SimulationOptions,
) -> Result<CosineSet> {
    if dim == 0 {
        return Err(Error::InvalidConfig("dimension must be at least 1".into()));
    }
    if options.budget == 0 {
        return Err(Error::InvalidConfig("budget must be at least 1".into()));
    }
    for (i, v) in seed.iter().enumerate() {
        if v.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: v.len() });
        }
        let err = (norm(v) - 1.0).abs();
        if err > 1e-6 {
            return Err(Error::NonUnitVector { index: i, error: err });
        }
        for (j, w) in seed.iter().enumerate().take(i) {
            let c = dot(v, w);
            if c > 0.5 + 1e-6 {
                return Err(Error::CosineCapViolation { row: j, col: i, value: c });
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.rng_seed);
    let start = grow_seed(seed, dim, &mut rng)?;
    let mut tree = SearchTree::new(options.exploration);
    let mut finished: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut placements = 0;
    let mut best_count = start.len();

    'episodes: while placements < options.budget {
        let mut centers = start.clone();
        let mut trajectory = Vec::new();
        let mut in_tree = true;
        loop {
            let options_here = candidates(&centers, dim, &mut rng);
            if options_here.is_empty() {
                break;
            }
            let sigs = signatures(&centers);
            let children: Vec<u64> = options_here
                .iter()
                .map(|x| sigs.child_hash(centers.iter().map(|c| quantized(dot(c, x)))))
                .collect();
            let state = sigs.hash();
            // tree policy down to the first new edge, uniform rollout below it
            let pick = if in_tree {
                let pick = tree.select_action(state, &children)?;
                in_tree = tree.edge(state, children[pick]).visits > 0;
                trajectory.push((state, children[pick]));
                pick
            } else {
                rng.random_range(0..children.len())
            };
            centers.push(options_here[pick].clone());
            placements += 1;
            if placements >= options.budget {
                break 'episodes;
            }
        }
        best_count = best_count.max(centers.len());
        tree.backpropagate(&trajectory, centers.len() as f64);
        finished.push(centers);
    }

    let episodes = finished.len();
    let elite: Vec<&Vec<Vec<f64>>> = finished.iter().filter(|c| c.len() == best_count).collect();
    let mut histogram = CosineHistogram::default();
    for (e, centers) in elite.iter().enumerate() {
        let half = usize::from(2 * e >= elite.len());
        for i in 0..centers.len() {
            for j in 0..i {
                histogram.record(dot(&centers[i], &centers[j]), half);
            }
        }
    }
    let total = histogram.total_samples as f64;
    let grouped = histogram.grouped();
    let above = |count: u64, of: f64| of > 0.0 && count as f64 >= NOISE_FLOOR * of;
    let halves_total = grouped.iter().fold([0u64; 2], |acc, g| {
        [acc[0] + g.halves[0], acc[1] + g.halves[1]]
    });
    let converged = elite.len() >= 2
        && grouped.iter().all(|g| {
            above(g.halves[0], halves_total[0] as f64) == above(g.halves[1], halves_total[1] as f64)
        });
    let values = grouped.into_iter().filter(|g| above(g.count(), total)).collect();
    Ok(CosineSet { dim, values, histogram, episodes, placements, best_count, converged })
}
