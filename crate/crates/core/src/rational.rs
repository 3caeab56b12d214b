//! Arbitrary-precision rationals and the few helpers the algebra needs on top
//! of `num-rational`.

use alloc::format;
use alloc::vec::Vec;

pub use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact fraction with a positive denominator, always kept in lowest terms.
pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `num / den`, reduced. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(q: &Rational) -> f64 {
    match q.to_f64() {
        Some(v) => v,
        None => {
            // Fallback for huge numerators or denominators.
            let n = q.numer().to_f64().unwrap_or(f64::NAN);
            let d = q.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

/// Exact conversion of a finite double. Every finite `f64` is a dyadic rational.
pub fn from_f64(v: f64) -> Option<Rational> {
    Rational::from_float(v)
}

/// `base^exp` for an integer exponent.
pub fn pow_int(base: &Rational, exp: i64) -> Result<Rational> {
    if exp < 0 && base.is_zero() {
        return Err(Error::Domain(format!("0 raised to negative power {exp}")));
    }
    let mut result = Rational::one();
    let mut b = if exp < 0 { base.recip() } else { base.clone() };
    let mut e = exp.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            result *= &b;
        }
        e >>= 1;
        if e > 0 {
            b = &b * &b;
        }
    }
    Ok(result)
}

/// `base^exp` for a rational exponent, when the result is itself rational.
///
/// `base` must be positive. Fractional exponents need exact roots of the
/// numerator and denominator; otherwise `NonRationalScaling` is returned.
pub fn pow_rational(base: &Rational, exp: &Rational) -> Result<Rational> {
    if !base.is_positive() {
        return Err(Error::Domain(format!("base {base} must be positive")));
    }
    if base.is_one() || exp.is_zero() {
        return Ok(Rational::one());
    }
    let num = exp
        .numer()
        .to_i64()
        .ok_or_else(|| Error::Domain(format!("exponent {exp} too large")))?;
    let den = exp
        .denom()
        .to_u32()
        .ok_or_else(|| Error::Domain(format!("exponent {exp} too large")))?;
    let powered = pow_int(base, num)?;
    if den == 1 {
        return Ok(powered);
    }
    let root_of = |v: &BigInt| -> Option<BigInt> {
        let r = v.nth_root(den);
        if num_traits::pow::pow(r.clone(), den as usize) == *v {
            Some(r)
        } else {
            None
        }
    };
    match (root_of(powered.numer()), root_of(powered.denom())) {
        (Some(n), Some(d)) => Ok(Rational::new(n, d)),
        _ => Err(Error::NonRationalScaling(format!("({base})^({exp})"))),
    }
}

/// Scales a rational vector to a primitive integer vector: denominators
/// cleared, gcd of entries 1, first nonzero entry positive. The zero vector
/// is returned unchanged.
pub fn primitive_integer_vector(v: &[Rational]) -> Vec<Rational> {
    let lcm = v
        .iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let ints: Vec<BigInt> = v
        .iter()
        .map(|q| q.numer() * (&lcm / q.denom()))
        .collect();
    let gcd = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if gcd.is_zero() {
        return v.to_vec();
    }
    let sign = match ints.iter().find(|x| !x.is_zero()) {
        Some(first) if first.is_negative() => -BigInt::one(),
        _ => BigInt::one(),
    };
    ints.into_iter()
        .map(|x| Rational::from_integer(&x / &gcd * &sign))
        .collect()
}
