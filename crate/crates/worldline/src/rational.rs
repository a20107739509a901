//! Exact rational weights.
//!
//! Measure weights are arbitrary-precision rationals so that marginal
//! conditions, flow feasibility and the curve-space constructions can be
//! checked bit-for-bit rather than up to a float tolerance. Every finite
//! `f64` is a dyadic rational, so float inputs convert exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Exact nonnegative mass carried by an atom, a coupling entry, or a curve.
pub type Weight = BigRational;

pub fn zero() -> Weight {
    BigRational::zero()
}

pub fn one() -> Weight {
    BigRational::one()
}

pub fn ratio(numer: i64, denom: i64) -> Weight {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn to_f64(w: &Weight) -> f64 {
    w.to_f64().unwrap_or(f64::NAN)
}

/// Exact conversion; every finite float is a dyadic rational.
pub fn from_f64(x: f64) -> Result<Weight> {
    BigRational::from_float(x).ok_or_else(|| Error::Parse(format!("non-finite weight {x}")))
}

/// Parses `"p/q"`, an integer, or a plain decimal such as `"0.25"`.
pub fn parse(s: &str) -> Result<Weight> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty weight".into()));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let q: BigInt = q
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let int_ok = int.is_empty() || int == "-" || int.chars().all(|c| c.is_ascii_digit() || c == '-');
        if !int_ok || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(Error::Parse(format!("bad decimal weight {s:?}")));
        }
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches('-');
        let digits = format!("{int_digits}{frac}");
        let numer: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits
                .parse()
                .map_err(|_| Error::Parse(format!("bad decimal weight {s:?}")))?
        };
        let denom = BigInt::from(10u32).pow(frac.len() as u32);
        let w = BigRational::new(numer, denom);
        return Ok(if negative { -w } else { w });
    }
    let n: BigInt = s
        .parse()
        .map_err(|_| Error::Parse(format!("bad weight {s:?}")))?;
    Ok(BigRational::from_integer(n))
}

/// Canonical `"p/q"` form (or `"p"` for integers); inverse of [`parse`].
pub fn format(w: &Weight) -> String {
    if w.denom().is_one() {
        format!("{}", w.numer())
    } else {
        format!("{}/{}", w.numer(), w.denom())
    }
}

pub fn is_positive(w: &Weight) -> bool {
    w.is_positive()
}
