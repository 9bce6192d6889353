//! The scalar abstraction shared by the floating and exact rational paths.
//!
//! Matrices are generic over [`Scalar`]. Each implementation decides how
//! comparisons treat tolerances: `f64` honours them, [`Rational`] ignores them
//! and compares exactly. Because the mode is part of the type, mixing float
//! and rational entries inside one matrix cannot happen; the only place it can
//! is at a text boundary, where [`Scalar::parse_scalar`] rejects it.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{NumRef, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact;
use crate::linalg;
use crate::matrix::SquareMatrix;
use crate::tolerance::Tolerances;

pub type Rational = BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithMode {
    Float,
    Rational,
}

impl ArithMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ArithMode::Float => "float",
            ArithMode::Rational => "rational",
        }
    }
}

impl FromStr for ArithMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "float" => Ok(ArithMode::Float),
            "rational" => Ok(ArithMode::Rational),
            other => Err(Error::InvalidConfig(format!("unknown mode {other:?}"))),
        }
    }
}

/// PSD verdict plus rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PsdReport {
    pub psd: bool,
    pub rank: usize,
}

pub trait Scalar:
    Clone + Debug + Display + PartialEq + PartialOrd + NumRef + Signed + Send + Sync + 'static
{
    const MODE: ArithMode;

    fn to_f64(&self) -> f64;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_rational(r: &Rational) -> Self;

    /// Exact conversion from a float; rationals reject it as a mode mix.
    fn from_f64_checked(x: f64) -> Result<Self>;

    fn half() -> Self {
        Self::from_ratio(1, 2)
    }

    /// `|self - other| <= tol`; exact equality for rationals.
    fn approx_eq(&self, other: &Self, tol: f64) -> bool;

    /// `self <= bound + tol`; exact comparison for rationals.
    fn le_tol(&self, bound: &Self, tol: f64) -> bool;

    /// `self > tol`; for rationals `self > 0`.
    fn exceeds(&self, tol: f64) -> bool;

    fn parse_scalar(text: &str) -> Result<Self>;

    fn format_scalar(&self) -> String;

    fn psd_report(m: &SquareMatrix<Self>, tol: &Tolerances) -> PsdReport;

    /// Quantized image used for order-independent hashing.
    fn quantize(&self) -> i64 {
        (self.to_f64() * 1e9).round() as i64
    }
}

impl Scalar for f64 {
    const MODE: ArithMode = ArithMode::Float;

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_rational(r: &Rational) -> Self {
        Scalar::to_f64(r)
    }

    fn from_f64_checked(x: f64) -> Result<Self> {
        Ok(x)
    }

    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self - other).abs() <= tol
    }

    fn le_tol(&self, bound: &Self, tol: f64) -> bool {
        *self <= bound + tol
    }

    fn exceeds(&self, tol: f64) -> bool {
        *self > tol
    }

    fn parse_scalar(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.contains('/') {
            let r = parse_rational(t)?;
            return Ok(Scalar::to_f64(&r));
        }
        let v: f64 = t.parse().map_err(|_| Error::ParseScalar(t.to_string()))?;
        if !v.is_finite() {
            return Err(Error::ParseScalar(t.to_string()));
        }
        Ok(v)
    }

    fn format_scalar(&self) -> String {
        format!("{:.16e}", self)
    }

    fn psd_report(m: &SquareMatrix<Self>, tol: &Tolerances) -> PsdReport {
        PsdReport {
            psd: linalg::is_psd(m, tol.psd),
            rank: linalg::rank(m, tol.rank),
        }
    }
}

impl Scalar for Rational {
    const MODE: ArithMode = ArithMode::Rational;

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn from_f64_checked(x: f64) -> Result<Self> {
        Err(Error::MixedModeEntries(format!("{x:e}")))
    }

    fn approx_eq(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }

    fn le_tol(&self, bound: &Self, _tol: f64) -> bool {
        self <= bound
    }

    fn exceeds(&self, _tol: f64) -> bool {
        self.is_positive()
    }

    fn parse_scalar(text: &str) -> Result<Self> {
        parse_rational(text.trim())
    }

    fn format_scalar(&self) -> String {
        format_rational(self)
    }

    fn psd_report(m: &SquareMatrix<Self>, _tol: &Tolerances) -> PsdReport {
        let cert = exact::exact_ldlt(m);
        PsdReport {
            psd: cert.psd,
            rank: cert.rank,
        }
    }
}

/// Parses `p/q`, `-p/q`, `+p/q` or a plain integer. Anything that looks like a
/// decimal is a mode error.
pub fn parse_rational(text: &str) -> Result<Rational> {
    if text.contains(['.', 'e', 'E']) {
        return Err(Error::MixedModeEntries(text.to_string()));
    }
    let (num, den) = match text.split_once('/') {
        Some((p, q)) => (p, q),
        None => (text, "1"),
    };
    let p = BigInt::from_str(num).map_err(|_| Error::ParseScalar(text.to_string()))?;
    if den.starts_with(['+', '-']) {
        return Err(Error::ParseScalar(text.to_string()));
    }
    let q = BigInt::from_str(den).map_err(|_| Error::ParseScalar(text.to_string()))?;
    if q.is_zero() {
        return Err(Error::ParseScalar(text.to_string()));
    }
    Ok(Rational::new(p, q))
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Best low-height rational approximation `p/q` with `q <= max_den` within `tol`.
pub fn snap_to_small_rational(value: f64, max_den: i64, tol: f64) -> Option<(i64, i64)> {
    let mut best: Option<(i64, i64, f64)> = None;
    for q in 1..=max_den {
        let p = (value * q as f64).round() as i64;
        let err = (value - p as f64 / q as f64).abs();
        if err <= tol && best.is_none_or(|(_, _, e)| err < e - 1e-15) {
            let g = num_integer::gcd(p, q);
            best = Some((p / g, q / g, err));
        }
    }
    best.map(|(p, q, _)| (p, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(p: i64, q: i64) -> Rational {
        Rational::from_ratio(p, q)
    }

    #[test]
    fn parses_rational_forms() {
        assert_eq!(parse_rational("1/2").unwrap(), r(1, 2));
        assert_eq!(parse_rational("-3/4").unwrap(), r(-3, 4));
        assert_eq!(parse_rational("+2/4").unwrap(), r(1, 2));
        assert_eq!(parse_rational("0").unwrap(), r(0, 1));
        assert_eq!(parse_rational("-1").unwrap(), r(-1, 1));
        assert!(matches!(parse_rational("0.5"), Err(Error::MixedModeEntries(_))));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("1/-2").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn reduced_with_positive_denominator() {
        let v = parse_rational("6/4").unwrap();
        assert_eq!(format_rational(&v), "3/2");
        let w = Rational::new(BigInt::from(2), BigInt::from(-4));
        assert_eq!(format_rational(&w), "-1/2");
    }

    #[test]
    fn float_parse_accepts_fractions() {
        assert_eq!(f64::parse_scalar("-1/2").unwrap(), -0.5);
        assert_eq!(f64::parse_scalar("2.5e-1").unwrap(), 0.25);
        let text = 0.1f64.format_scalar();
        assert_eq!(f64::parse_scalar(&text).unwrap(), 0.1);
    }

    #[test]
    fn snapping_small_rationals() {
        assert_eq!(snap_to_small_rational(-0.75 + 1e-8, 12, 1e-6), Some((-3, 4)));
        assert_eq!(snap_to_small_rational(0.0, 12, 1e-6), Some((0, 1)));
        assert_eq!(snap_to_small_rational(1.0 / 5f64.sqrt(), 12, 1e-6), None);
    }

    proptest! {
        #[test]
        fn rational_field_laws(a in -50i64..50, b in 1i64..20, c in -50i64..50, d in 1i64..20, e in -50i64..50, f in 1i64..20) {
            let (x, y, z) = (r(a, b), r(c, d), r(e, f));
            prop_assert_eq!(&x + &y, &y + &x);
            prop_assert_eq!(&x * &y, &y * &x);
            prop_assert_eq!((&x + &y) + &z, &x + (&y + &z));
            prop_assert_eq!((&x * &y) * &z, &x * (&y * &z));
            // reduction preserves value
            let raw = Rational::new_raw(BigInt::from(a * 3), BigInt::from(b * 3));
            prop_assert_eq!(raw.reduced(), r(a, b));
            prop_assert!(x.denom().is_positive());
        }

        #[test]
        fn rational_text_round_trip(a in -1000i64..1000, b in 1i64..1000) {
            let x = r(a, b);
            prop_assert_eq!(parse_rational(&format_rational(&x)).unwrap(), x);
        }
    }
}
