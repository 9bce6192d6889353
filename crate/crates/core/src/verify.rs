//! Certificates for claimed kissing configurations.
//!
//! A configuration passes when every off-diagonal cosine is at most 1/2, the
//! Gram matrix is PSD with rank at most `dim`, and (for coordinate input)
//! every vector has unit norm. Rational input is checked exactly.

use std::fmt::Write as _;

use crate::cosines::snap_cosine;
use crate::error::{Error, Result};
use crate::gram::GramState;
use crate::linalg;
use crate::matrix::SquareMatrix;
use crate::scalar::{ArithMode, Scalar};
use crate::tolerance::Tolerances;

pub const CERTIFICATE_KIND: &str = "kiss-certificate";
/// Allowed deviation of a vector norm from 1 in floating mode.
pub const UNIT_NORM_TOL: f64 = 1e-6;
/// Floating cosines closer than this share a spectrum entry.
pub const CLUSTER_TOL: f64 = 1e-7;
/// Snapping radius for spectrum labels.
pub const SPECTRUM_SNAP_TOL: f64 = 1e-6;
/// Entries this close to the maximum cosine count as contacts.
pub const CONTACT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumEntry {
    /// Exact form when known, otherwise a decimal.
    pub label: String,
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Pass,
    Fail(Vec<Error>),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub mode: ArithMode,
    pub count: usize,
    pub dim: usize,
    /// `None` for fewer than two rows.
    pub max_cosine: Option<String>,
    pub psd: bool,
    /// Smallest eigenvalue in floating mode.
    pub min_eigenvalue: Option<f64>,
    pub rank: usize,
    /// Coordinate input only.
    pub unit_norm_max_error: Option<f64>,
    pub spectrum: Vec<SpectrumEntry>,
    pub contact_degrees: Vec<usize>,
    /// No pair of rows is antipodal.
    pub fully_non_antipodal: bool,
    pub verdict: Verdict,
}

fn reason_text(e: &Error) -> String {
    match e {
        Error::CosineCapViolation { row, col, value } => {
            format!("CosineCapViolation(row={row},col={col},value={value:?})")
        }
        Error::NotPsd => "NotPsd".into(),
        Error::RankExceedsDim { dim, rank } => format!("RankExceedsDim(rank={rank},dim={dim})"),
        Error::NonUnitVector { index, error } => {
            format!("NonUnitVector(index={index},error={error:?})")
        }
        other => other.to_string(),
    }
}

impl Certificate {
    /// Canonical key-ordered text.
    pub fn to_text(&self) -> String {
        let mut out = format!("{CERTIFICATE_KIND} v1\n");
        let degrees: Vec<String> = self.contact_degrees.iter().map(|d| d.to_string()).collect();
        let spectrum: Vec<String> = self
            .spectrum
            .iter()
            .map(|e| format!("{}:{}", e.label, e.multiplicity))
            .collect();
        let verdict = match &self.verdict {
            Verdict::Pass => "pass".to_string(),
            Verdict::Fail(reasons) => {
                let r: Vec<String> = reasons.iter().map(reason_text).collect();
                format!("fail {}", r.join(" "))
            }
        };
        let opt = |v: Option<f64>| v.map_or("none".to_string(), |x| format!("{x:e}"));
        let _ = writeln!(out, "contactDegrees = {}", degrees.join(" "));
        let _ = writeln!(out, "count = {}", self.count);
        let _ = writeln!(out, "dim = {}", self.dim);
        let _ = writeln!(out, "fullyNonAntipodal = {}", self.fully_non_antipodal);
        let _ = writeln!(out, "maxCosine = {}", self.max_cosine.as_deref().unwrap_or("none"));
        let _ = writeln!(out, "minEigenvalue = {}", opt(self.min_eigenvalue));
        let _ = writeln!(out, "mode = {}", self.mode.as_str());
        let _ = writeln!(out, "psd = {}", self.psd);
        let _ = writeln!(out, "rank = {}", self.rank);
        let _ = writeln!(out, "spectrum = {}", spectrum.join(" "));
        let _ = writeln!(out, "unitNormMaxError = {}", opt(self.unit_norm_max_error));
        let _ = writeln!(out, "verdict = {verdict}");
        out
    }
}

/// Distinct off-diagonal cosines with multiplicities, ascending. Rational
/// values are grouped exactly; floating values are clustered and snapped.
pub fn spectrum_report<S: Scalar>(state: &GramState<S>) -> Vec<SpectrumEntry> {
    let m = state.count();
    let mut values: Vec<&S> = Vec::with_capacity(m * m.saturating_sub(1) / 2);
    for i in 0..m {
        for j in (i + 1)..m {
            values.push(state.get(i, j));
        }
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut out: Vec<SpectrumEntry> = Vec::new();
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && values[end].approx_eq(values[end - 1], CLUSTER_TOL) {
            end += 1;
        }
        let group = &values[start..end];
        let entry = match S::MODE {
            ArithMode::Rational => SpectrumEntry {
                label: group[0].format_scalar(),
                value: group[0].to_f64(),
                multiplicity: group.len(),
            },
            ArithMode::Float => {
                let mean = group.iter().map(|v| v.to_f64()).sum::<f64>() / group.len() as f64;
                match snap_cosine(mean, SPECTRUM_SNAP_TOL) {
                    Some(exact) => SpectrumEntry {
                        label: exact.to_string(),
                        value: exact.value(),
                        multiplicity: group.len(),
                    },
                    None => SpectrumEntry {
                        label: format!("{mean:.12}"),
                        value: mean,
                        multiplicity: group.len(),
                    },
                }
            }
        };
        out.push(entry);
        start = end;
    }
    out
}

fn certify<S: Scalar>(
    state: &GramState<S>,
    tol: &Tolerances,
    unit_norm_max_error: Option<f64>,
    mut reasons: Vec<Error>,
) -> Certificate {
    let m = state.count();
    let max = state.max_cosine();
    if let Some((row, col, value)) = state.cap_violation(tol.cosine_cap) {
        reasons.push(Error::CosineCapViolation { row, col, value: value.to_f64() });
    }
    let report = state.psd_report(tol);
    if !report.psd {
        reasons.push(Error::NotPsd);
    }
    if report.rank > state.dim() {
        reasons.push(Error::RankExceedsDim { dim: state.dim(), rank: report.rank });
    }
    let min_eigenvalue = match S::MODE {
        ArithMode::Float => {
            let float = state.entries().map(|v| v.to_f64());
            Some(linalg::smallest_eigenvalue(&float))
        }
        ArithMode::Rational => None,
    };
    let contact_degrees = (0..m)
        .map(|i| match &max {
            Some(max) => (0..m)
                .filter(|&j| j != i && state.get(i, j).approx_eq(max, CONTACT_TOL))
                .count(),
            None => 0,
        })
        .collect();
    let minus_one = -S::one();
    let fully_non_antipodal = (0..m).all(|i| {
        ((i + 1)..m).all(|j| !state.get(i, j).approx_eq(&minus_one, CONTACT_TOL))
    });
    Certificate {
        mode: S::MODE,
        count: m,
        dim: state.dim(),
        max_cosine: max.as_ref().map(Scalar::format_scalar),
        psd: report.psd,
        min_eigenvalue,
        rank: report.rank,
        unit_norm_max_error,
        spectrum: spectrum_report(state),
        contact_degrees,
        fully_non_antipodal,
        verdict: if reasons.is_empty() { Verdict::Pass } else { Verdict::Fail(reasons) },
    }
}

pub fn verify_gram<S: Scalar>(state: &GramState<S>, tol: &Tolerances) -> Certificate {
    certify(state, tol, None, Vec::new())
}

/// Builds the Gram matrix of `vectors` (diagonal set to 1) and certifies it.
/// Rational vectors must have norm exactly 1; floating ones within 1e-6.
pub fn verify_vectors<S: Scalar>(dim: usize, vectors: &[Vec<S>], tol: &Tolerances) -> Result<Certificate> {
    let m = vectors.len();
    let mut reasons = Vec::new();
    let mut worst = 0.0f64;
    let mut entries = SquareMatrix::zeros(m);
    for (i, v) in vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: v.len() });
        }
        let norm2 = dot(v, v);
        let error = (norm2.to_f64().sqrt() - 1.0).abs();
        worst = worst.max(error);
        let unit = match S::MODE {
            ArithMode::Rational => norm2 == S::one(),
            ArithMode::Float => error <= UNIT_NORM_TOL,
        };
        if !unit {
            reasons.push(Error::NonUnitVector { index: i, error });
        }
        entries.set(i, i, S::one());
        for (j, w) in vectors.iter().enumerate().skip(i + 1) {
            if w.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: w.len() });
            }
            let d = dot(v, w);
            entries.set(i, j, d.clone());
            entries.set(j, i, d);
        }
    }
    let state = GramState::new(dim, entries)?;
    Ok(certify(&state, tol, Some(worst), reasons))
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refconfigs::{cross_polytope, e8_roots, hexagon, icosahedron, simplex};
    use crate::scalar::Rational;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn labels(spectrum: &[SpectrumEntry]) -> Vec<(String, usize)> {
        spectrum.iter().map(|e| (e.label.clone(), e.multiplicity)).collect()
    }

    #[test]
    fn hexagon_spectrum() {
        let g = hexagon().float_gram();
        let expect = [("-1", 3), ("-1/2", 6), ("1/2", 6)].map(|(l, c)| (l.to_string(), c));
        assert_eq!(labels(&spectrum_report(&g)), expect);
    }

    #[test]
    fn corrupted_hexagon_fails_the_cap() {
        let g = hexagon().float_gram();
        let mut rows: Vec<Vec<f64>> = g.entries().rows().map(<[f64]>::to_vec).collect();
        rows[0][1] = 0.6;
        rows[1][0] = 0.6;
        let bad = GramState::from_rows(2, rows).unwrap();
        let cert = verify_gram(&bad, &tol());
        match cert.verdict {
            Verdict::Fail(reasons) => {
                assert!(reasons.iter().any(|r| matches!(r, Error::CosineCapViolation { .. })))
            }
            Verdict::Pass => panic!("corrupted hexagon passed"),
        }
    }

    #[test]
    fn cross_polytope_spectrum_and_cert() {
        let x4 = cross_polytope(4).exact_gram.unwrap();
        let expect = [("-1", 4), ("0", 24)].map(|(l, c)| (l.to_string(), c));
        assert_eq!(labels(&spectrum_report(&x4)), expect);
        let x24 = cross_polytope(24).exact_gram.unwrap();
        let cert = verify_gram(&x24, &tol());
        assert!(cert.verdict.is_pass());
        assert_eq!(cert.count, 48);
        assert_eq!(cert.max_cosine.as_deref(), Some("0"));
    }

    #[test]
    fn antipodality_flag() {
        assert!(!verify_gram(&hexagon().float_gram(), &tol()).fully_non_antipodal);
        let s = simplex(3).exact_gram.unwrap();
        assert!(verify_gram(&s, &tol()).fully_non_antipodal);
    }

    #[test]
    fn icosahedron_max_cosine() {
        let ico = icosahedron();
        let cert = verify_vectors(3, &ico.vectors, &tol()).unwrap();
        assert!(cert.verdict.is_pass());
        let max: f64 = cert.max_cosine.unwrap().parse().unwrap();
        assert!((max - 1.0 / 5f64.sqrt()).abs() < 1e-12);
        assert!(cert.contact_degrees.iter().all(|&d| d == 5));
    }

    #[test]
    fn antipodal_pair_passes() {
        let cert = verify_vectors(2, &[vec![1.0, 0.0], vec![-1.0, 0.0]], &tol()).unwrap();
        assert!(cert.verdict.is_pass());
        assert_eq!(cert.count, 2);
    }

    #[test]
    fn non_unit_vectors_fail() {
        let cert = verify_vectors(2, &[vec![1.0, 0.0], vec![0.0, 1.1]], &tol()).unwrap();
        assert!(matches!(&cert.verdict, Verdict::Fail(r) if matches!(r[0], Error::NonUnitVector { index: 1, .. })));
        let r = |p, q| Rational::from_ratio(p, q);
        let exact = [vec![r(3, 5), r(4, 5)], vec![r(1, 1), r(1, 1000)]];
        let cert = verify_vectors(2, &exact, &tol()).unwrap();
        assert!(matches!(&cert.verdict, Verdict::Fail(r) if matches!(r[0], Error::NonUnitVector { index: 1, .. })));
    }

    #[test]
    fn e8_contact_degrees_match_brute_force() {
        let e8 = e8_roots();
        let cert = verify_gram(e8.exact_gram.as_ref().unwrap(), &tol());
        assert!(cert.verdict.is_pass());
        assert_eq!(cert.rank, 8);
        assert_eq!(cert.max_cosine.as_deref(), Some("1/2"));
        // neighbours counted directly from coordinates
        for (i, v) in e8.vectors.iter().enumerate() {
            let brute = e8
                .vectors
                .iter()
                .enumerate()
                .filter(|&(j, w)| j != i && (linalg::dot(v, w) - 0.5).abs() < 1e-9)
                .count();
            assert_eq!(cert.contact_degrees[i], brute);
        }
        assert_eq!(cert.contact_degrees[0], 56);
    }
}
