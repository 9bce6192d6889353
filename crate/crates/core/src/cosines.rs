//! Snapping floating cosines to exact forms.

use std::fmt;

use crate::scalar::{snap_to_small_rational, Rational, Scalar};

/// Largest denominator tried when snapping to a rational.
pub const MAX_DENOMINATOR: i64 = 12;

/// Irrational cosines that occur in known high-dimensional codes, with the
/// sign folded into the name.
type NamedValue = (&'static str, fn() -> f64);

const ALGEBRAIC: [NamedValue; 5] = [
    ("sqrt(6)/12", || 6f64.sqrt() / 12.0),
    ("sqrt(6)/6", || 6f64.sqrt() / 6.0),
    ("sqrt(3)/6", || 3f64.sqrt() / 6.0),
    ("(2sqrt(3)-sqrt(6))/12", || (2.0 * 3f64.sqrt() - 6f64.sqrt()) / 12.0),
    ("(2sqrt(3)+sqrt(6))/12", || (2.0 * 3f64.sqrt() + 6f64.sqrt()) / 12.0),
];

#[derive(Clone, Debug, PartialEq)]
pub enum ExactCosine {
    Rational(Rational),
    /// Signed closed form and its value.
    Algebraic { form: String, value: f64 },
}

impl ExactCosine {
    pub fn value(&self) -> f64 {
        match self {
            ExactCosine::Rational(r) => r.to_f64(),
            ExactCosine::Algebraic { value, .. } => *value,
        }
    }
}

impl fmt::Display for ExactCosine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactCosine::Rational(r) => f.write_str(&r.format_scalar()),
            ExactCosine::Algebraic { form, .. } => f.write_str(form),
        }
    }
}

/// Exact form within `tol` of `value`: rationals with denominator at most 12
/// first, then the known algebraic constants.
pub fn snap_cosine(value: f64, tol: f64) -> Option<ExactCosine> {
    if let Some((p, q)) = snap_to_small_rational(value, MAX_DENOMINATOR, tol) {
        return Some(ExactCosine::Rational(Rational::from_ratio(p, q)));
    }
    for (name, f) in ALGEBRAIC {
        let c = f();
        for (sign, v) in [("", c), ("-", -c)] {
            if (value - v).abs() <= tol {
                return Some(ExactCosine::Algebraic {
                    form: format!("{sign}{name}"),
                    value: v,
                });
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snaps_rationals_and_constants() {
        assert_eq!(snap_cosine(-0.5000000003, 1e-6).unwrap().to_string(), "-1/2");
        assert_eq!(snap_cosine(0.25, 1e-6).unwrap().to_string(), "1/4");
        assert_eq!(snap_cosine(-5.0 / 6.0, 1e-6).unwrap().to_string(), "-5/6");
        let s = snap_cosine(6f64.sqrt() / 12.0 + 1e-8, 1e-6).unwrap();
        assert_eq!(s.to_string(), "sqrt(6)/12");
        let s = snap_cosine(-(2.0 * 3f64.sqrt() + 6f64.sqrt()) / 12.0, 1e-6).unwrap();
        assert_eq!(s.to_string(), "-(2sqrt(3)+sqrt(6))/12");
        assert!(snap_cosine(1.0 / 5f64.sqrt(), 1e-6).is_none());
    }
}
