//! Deterministic generators for known configurations.
//!
//! Lattice families are built from integer coordinates of equal norm, so
//! their Gram matrices are available exactly as rationals alongside the
//! normalized floating-point vectors.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::gram::GramState;
use crate::io::vectors::{read_vector_file, VectorData};
use crate::linalg;
use crate::matrix::SquareMatrix;
use crate::scalar::{Rational, Scalar};

/// Kissing numbers for `1 <= n <= 24` with a flag for the values known to be optimal.
pub const KISSING_TABLE: [(usize, usize, bool); 24] = [
    (1, 2, true),
    (2, 6, true),
    (3, 12, true),
    (4, 24, true),
    (5, 40, false),
    (6, 72, false),
    (7, 126, false),
    (8, 240, true),
    (9, 306, false),
    (10, 510, false),
    (11, 593, false),
    (12, 840, false),
    (13, 1154, false),
    (14, 1932, false),
    (15, 2564, false),
    (16, 4320, false),
    (17, 5730, false),
    (18, 7654, false),
    (19, 11692, false),
    (20, 19448, false),
    (21, 29768, false),
    (22, 49896, false),
    (23, 93150, false),
    (24, 196560, true),
];

/// The proven optimum in dimension `dim`, if one is known.
pub fn known_optimum(dim: usize) -> Option<usize> {
    KISSING_TABLE
        .iter()
        .find(|(n, _, optimal)| *n == dim && *optimal)
        .map(|&(_, k, _)| k)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeneratorId {
    CrossPolytope(usize),
    Simplex(usize),
    Hexagon,
    Icosahedron,
    D4Roots,
    E8Roots,
    FromVectorFile(PathBuf),
}

impl fmt::Display for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorId::CrossPolytope(n) => write!(f, "CrossPolytope({n})"),
            GeneratorId::Simplex(n) => write!(f, "Simplex({n})"),
            GeneratorId::Hexagon => f.write_str("Hexagon"),
            GeneratorId::Icosahedron => f.write_str("Icosahedron"),
            GeneratorId::D4Roots => f.write_str("D4Roots"),
            GeneratorId::E8Roots => f.write_str("E8Roots"),
            GeneratorId::FromVectorFile(p) => write!(f, "FromVectorFile({})", p.display()),
        }
    }
}

impl FromStr for GeneratorId {
    type Err = Error;

    /// Accepts `CrossPolytope(5)`, `Simplex(3)`, `Hexagon`, `Icosahedron`,
    /// `D4Roots`, `E8Roots`, `FromVectorFile(path)` and `file:path`
    /// (names are case-insensitive).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(GeneratorId::FromVectorFile(PathBuf::from(path)));
        }
        let (name, arg) = match s.find('(') {
            Some(open) if s.ends_with(')') => (&s[..open], Some(&s[open + 1..s.len() - 1])),
            Some(_) => return Err(Error::UnknownGenerator(s.to_string())),
            None => (s, None),
        };
        let count = |arg: Option<&str>| -> Result<usize> {
            let n: usize = arg
                .and_then(|a| a.trim().parse().ok())
                .ok_or_else(|| Error::UnknownGenerator(s.to_string()))?;
            if n == 0 {
                return Err(Error::UnknownGenerator(s.to_string()));
            }
            Ok(n)
        };
        let lower = name.to_ascii_lowercase();
        match (lower.as_str(), arg) {
            ("crosspolytope", a) => Ok(GeneratorId::CrossPolytope(count(a)?)),
            ("simplex", a) => Ok(GeneratorId::Simplex(count(a)?)),
            ("hexagon", None) => Ok(GeneratorId::Hexagon),
            ("icosahedron", None) => Ok(GeneratorId::Icosahedron),
            ("d4roots", None) => Ok(GeneratorId::D4Roots),
            ("e8roots", None) => Ok(GeneratorId::E8Roots),
            ("fromvectorfile", Some(p)) => Ok(GeneratorId::FromVectorFile(PathBuf::from(p))),
            _ => Err(Error::UnknownGenerator(s.to_string())),
        }
    }
}

/// A generated configuration: unit vectors plus, when every cosine is
/// rational, the exact Gram matrix.
#[derive(Clone, Debug)]
pub struct Configuration {
    pub dim: usize,
    pub vectors: Vec<Vec<f64>>,
    pub exact_gram: Option<GramState<Rational>>,
}

impl Configuration {
    pub fn count(&self) -> usize {
        self.vectors.len()
    }

    /// Floating Gram matrix; taken from the exact one when available.
    pub fn float_gram(&self) -> GramState<f64> {
        match &self.exact_gram {
            Some(g) => g.to_float(),
            None => GramState::from_vectors(self.dim, &self.vectors).expect("consistent vectors"),
        }
    }

    /// The first `rows` rows as a smaller configuration.
    pub fn truncated(&self, rows: usize) -> Configuration {
        let rows = rows.min(self.count());
        let keep: Vec<usize> = (0..rows).collect();
        Configuration {
            dim: self.dim,
            vectors: self.vectors[..rows].to_vec(),
            exact_gram: self.exact_gram.as_ref().map(|g| g.principal(&keep)),
        }
    }
}

pub fn generate(id: &GeneratorId) -> Result<Configuration> {
    match id {
        GeneratorId::CrossPolytope(n) => Ok(cross_polytope(*n)),
        GeneratorId::Simplex(n) => Ok(simplex(*n)),
        GeneratorId::Hexagon => Ok(hexagon()),
        GeneratorId::Icosahedron => Ok(icosahedron()),
        GeneratorId::D4Roots => Ok(d4_roots()),
        GeneratorId::E8Roots => Ok(e8_roots()),
        GeneratorId::FromVectorFile(path) => from_vector_file(path),
    }
}

fn from_integer_vectors(dim: usize, raw: Vec<Vec<i64>>) -> Configuration {
    let norm2: i64 = raw[0].iter().map(|x| x * x).sum();
    debug_assert!(raw.iter().all(|v| v.iter().map(|x| x * x).sum::<i64>() == norm2));
    let scale = (norm2 as f64).sqrt();
    let vectors = raw
        .iter()
        .map(|v| v.iter().map(|&x| x as f64 / scale).collect())
        .collect();
    let m = raw.len();
    let mut entries = SquareMatrix::from_row_major(m, vec![Rational::zero(); m * m]).expect("square");
    for i in 0..m {
        for j in 0..m {
            let dot: i64 = raw[i].iter().zip(&raw[j]).map(|(a, b)| a * b).sum();
            entries.set(i, j, Rational::from_ratio(dot, norm2));
        }
    }
    Configuration {
        dim,
        vectors,
        exact_gram: Some(GramState::new(dim, entries).expect("valid lattice gram")),
    }
}

/// `±e_i`, ordered `e_1, -e_1, e_2, -e_2, ...`.
pub fn cross_polytope(n: usize) -> Configuration {
    let mut raw = Vec::with_capacity(2 * n);
    for i in 0..n {
        for sign in [1, -1] {
            let mut v = vec![0i64; n];
            v[i] = sign;
            raw.push(v);
        }
    }
    from_integer_vectors(n, raw)
}

/// `n + 1` vectors with pairwise cosine `-1/n`.
pub fn simplex(n: usize) -> Configuration {
    let a = (1.0 - ((n + 1) as f64).sqrt()) / n as f64;
    let mut points: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            v
        })
        .collect();
    points.push(vec![a; n]);
    let centroid: Vec<f64> = (0..n)
        .map(|k| points.iter().map(|p| p[k]).sum::<f64>() / (n + 1) as f64)
        .collect();
    let vectors = points
        .iter()
        .map(|p| {
            let d: Vec<f64> = p.iter().zip(&centroid).map(|(x, c)| x - c).collect();
            let norm = linalg::norm(&d);
            d.iter().map(|x| x / norm).collect()
        })
        .collect();
    let m = n + 1;
    let off = Rational::from_ratio(-1, n as i64);
    let mut entries = SquareMatrix::from_row_major(m, vec![off; m * m]).expect("square");
    for i in 0..m {
        entries.set(i, i, Rational::one());
    }
    Configuration {
        dim: n,
        vectors,
        exact_gram: Some(GramState::new(n, entries).expect("simplex gram")),
    }
}

/// Six planar unit vectors at 60° steps.
pub fn hexagon() -> Configuration {
    let vectors = (0..6)
        .map(|k| {
            let t = k as f64 * std::f64::consts::PI / 3.0;
            vec![t.cos(), t.sin()]
        })
        .collect();
    let cycle = [(1, 1), (1, 2), (-1, 2), (-1, 1), (-1, 2), (1, 2)];
    let mut entries = SquareMatrix::from_row_major(6, vec![Rational::zero(); 36]).expect("square");
    for i in 0..6 {
        for j in 0..6 {
            let (p, q) = cycle[(6 + j - i) % 6];
            entries.set(i, j, Rational::from_ratio(p, q));
        }
    }
    Configuration {
        dim: 2,
        vectors,
        exact_gram: Some(GramState::new(2, entries).expect("hexagon gram")),
    }
}

/// Twelve vertices `(0, ±1, ±φ)` and cyclic permutations, normalized.
pub fn icosahedron() -> Configuration {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let norm = (1.0 + phi * phi).sqrt();
    let mut vectors = Vec::with_capacity(12);
    for shift in 0..3 {
        for s1 in [1.0, -1.0] {
            for s2 in [1.0, -1.0] {
                let base = [0.0, s1, s2 * phi];
                let v: Vec<f64> = (0..3).map(|k| base[(k + 3 - shift) % 3] / norm).collect();
                vectors.push(v);
            }
        }
    }
    Configuration {
        dim: 3,
        vectors,
        exact_gram: None,
    }
}

/// The 24 roots `(±1, ±1, 0, 0)` (all placements), normalized.
pub fn d4_roots() -> Configuration {
    from_integer_vectors(4, pair_roots(4, 1))
}

fn pair_roots(n: usize, unit: i64) -> Vec<Vec<i64>> {
    let mut raw = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            for (si, sj) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let mut v = vec![0i64; n];
                v[i] = si * unit;
                v[j] = sj * unit;
                raw.push(v);
            }
        }
    }
    raw
}

/// The 240 E8 roots: 112 of shape `(±1, ±1, 0^6)` followed by 128 of shape
/// `(±1/2)^8` with an even number of minus signs, normalized.
pub fn e8_roots() -> Configuration {
    // Coordinates are doubled so everything is an integer with norm² 8.
    let mut raw = pair_roots(8, 2);
    for mask in 0u32..256 {
        if mask.count_ones() % 2 == 0 {
            raw.push((0..8).map(|k| if mask >> k & 1 == 1 { -1 } else { 1 }).collect());
        }
    }
    from_integer_vectors(8, raw)
}

/// Reads a vector file, scales every vector to unit norm and checks the
/// cosine cap. Rational input keeps an exact Gram matrix whenever every
/// normalization factor `sqrt(|u|²|v|²)` is itself rational.
pub fn from_vector_file(path: &Path) -> Result<Configuration> {
    let data = read_vector_file(path)?;
    let config = ingest(data)?;
    if let Some((row, col, value)) = config.float_gram().cap_violation(1e-9) {
        return Err(Error::CosineCapViolation {
            row,
            col,
            value: value.to_f64(),
        });
    }
    Ok(config)
}

pub fn ingest(data: VectorData) -> Result<Configuration> {
    match data {
        VectorData::Float { dim, vectors } => {
            let vectors = vectors
                .into_iter()
                .enumerate()
                .map(|(i, v)| normalize(i, v))
                .collect::<Result<Vec<_>>>()?;
            Ok(Configuration {
                dim,
                vectors,
                exact_gram: None,
            })
        }
        VectorData::Rational { dim, vectors } => {
            let norms: Vec<Rational> = vectors
                .iter()
                .map(|v| v.iter().map(|x| x * x).fold(Rational::zero(), |a, b| a + b))
                .collect();
            if let Some(i) = norms.iter().position(|n| n.is_zero()) {
                return Err(Error::NonUnitVector { index: i, error: 1.0 });
            }
            let float_vectors: Vec<Vec<f64>> = vectors
                .iter()
                .enumerate()
                .map(|(i, v)| normalize(i, v.iter().map(|x| x.to_f64()).collect()))
                .collect::<Result<_>>()?;
            let exact_gram = exact_normalized_gram(dim, &vectors, &norms);
            Ok(Configuration {
                dim,
                vectors: float_vectors,
                exact_gram,
            })
        }
    }
}

fn normalize(index: usize, v: Vec<f64>) -> Result<Vec<f64>> {
    let norm = linalg::norm(&v);
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::NonUnitVector { index, error: 1.0 });
    }
    Ok(v.into_iter().map(|x| x / norm).collect())
}

fn exact_normalized_gram(
    dim: usize,
    vectors: &[Vec<Rational>],
    norms: &[Rational],
) -> Option<GramState<Rational>> {
    let m = vectors.len();
    let mut entries = SquareMatrix::from_row_major(m, vec![Rational::zero(); m * m]).ok()?;
    for i in 0..m {
        entries.set(i, i, Rational::one());
        for j in (i + 1)..m {
            let dot = vectors[i]
                .iter()
                .zip(&vectors[j])
                .map(|(a, b)| a * b)
                .fold(Rational::zero(), |a, b| a + b);
            let scale = rational_sqrt(&(&norms[i] * &norms[j]))?;
            let v = dot / scale;
            entries.set(i, j, v.clone());
            entries.set(j, i, v);
        }
    }
    GramState::new(dim, entries).ok()
}

fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let root = |n: &BigInt| -> Option<BigInt> {
        let s = n.sqrt();
        (&s * &s == *n).then_some(s)
    };
    Some(Rational::new(root(r.numer())?, root(r.denom())?))
}
