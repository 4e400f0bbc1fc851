//! Arbitrary-precision rational arithmetic for certificate checks.
//!
//! Every margin used by the minimum-distance certificate is a polynomial in
//! `ell^-3` with rational coefficients, so its sign at a rational `ell` can be
//! decided exactly. The exponential comparisons in the radius ratio are
//! decided with rigorous Taylor enclosures.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{domain, Result};

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses a plain decimal literal such as `0.4275`, `-3`, or `41.66`.
pub fn decimal(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty()
        || !whole.chars().all(|c| c.is_ascii_digit())
        || !frac.chars().all(|c| c.is_ascii_digit())
    {
        return domain(format!("not a decimal literal: {text:?}"));
    }
    let digits = format!("{whole}{frac}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().expect("validated digits")
    };
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let value = BigRational::new(numer, denom);
    Ok(if neg { -value } else { value })
}

/// The exact binary value of a finite `f64`.
pub fn from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).map_or_else(|| domain(format!("not finite: {x}")), Ok)
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn powi(x: &BigRational, k: i32) -> BigRational {
    if k >= 0 {
        num_traits::pow(x.clone(), k as usize)
    } else {
        num_traits::pow(x.recip(), (-k) as usize)
    }
}

/// Rigorous enclosure `lo <= exp(x) <= hi`.
///
/// For `x >= 0` the Taylor partial sum is a lower bound and the remainder is
/// bounded by a geometric series once the terms start shrinking. Negative
/// arguments use `exp(x) = 1 / exp(-x)`.
pub fn exp_bounds(x: &BigRational, terms: usize) -> (BigRational, BigRational) {
    if x.is_negative() {
        let (lo, hi) = exp_bounds(&-x, terms);
        return (hi.recip(), lo.recip());
    }
    // enough terms that the remainder ratio x/(k+2) is below 1/2
    let needed = (2.0 * to_f64(x)).ceil().max(0.0) as usize + 2;
    let terms = terms.max(needed);
    let mut sum = BigRational::zero();
    let mut term = BigRational::one();
    for k in 0..=terms {
        if k > 0 {
            term = term * x / int(k as i64);
        }
        sum += &term;
    }
    // remainder <= next * sum_{j>=0} q^j with q = x / (terms + 2)
    let next = &term * x / int(terms as i64 + 1);
    let q = x / int(terms as i64 + 2);
    let tail = next / (BigRational::one() - q);
    let hi = &sum + tail;
    (sum, hi)
}
