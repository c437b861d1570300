//! Exact rationals and the small field trait shared by exact and float solves.

use malachite_base::num::basic::traits::{One, Zero};
use malachite_base::num::conversion::traits::RoundingFrom;
use malachite_base::rounding_modes::RoundingMode;
use malachite_nz::natural::Natural;
use malachite_q::Rational;
use std::fmt::Debug;
use std::str::FromStr;

use crate::error::Error;

/// Exact scalar used by every identity and rank computation.
pub type Q = Rational;

pub fn int(n: i64) -> Q {
    Rational::from(n)
}

/// `n/d` in lowest terms. Panics on `d == 0`.
pub fn frac(n: i64, d: i64) -> Q {
    Rational::from_signeds(n, d)
}

pub fn zero() -> Q {
    Rational::ZERO
}

pub fn one() -> Q {
    Rational::ONE
}

/// Text form used in reports and cochain dumps: always `p/q` with `q >= 1`.
pub fn format_q(q: &Q) -> String {
    if *q.denominator_ref() == 1u32 {
        format!("{q}/1")
    } else {
        q.to_string()
    }
}

/// Accepts `p/q` and plain integers.
pub fn parse_q(s: &str) -> Result<Q, Error> {
    let t = s.trim();
    let ok = !t.is_empty()
        && t.chars()
            .all(|c| c.is_ascii_digit() || c == '/' || c == '-');
    if !ok {
        return Err(Error::Parse(format!("not a rational: {s:?}")));
    }
    Rational::from_str(t).map_err(|_| Error::Parse(format!("not a rational: {s:?}")))
}

pub fn to_f64(q: &Q) -> f64 {
    f64::rounding_from(q, RoundingMode::Nearest).0
}

/// Prime used for rank bounds: `2^61 − 1`.
pub const PRIME: u64 = (1 << 61) - 1;

pub fn mul_mod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

pub fn inv_mod(a: u64) -> u64 {
    let (mut base, mut e, mut acc) = (a, PRIME - 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base);
        }
        base = mul_mod(base, base);
        e >>= 1;
    }
    acc
}

/// Image in the prime field, `None` when the denominator is divisible by
/// the prime.
pub fn to_mod_p(q: &Q) -> Option<u64> {
    let p = Natural::from(PRIME);
    let n = u64::try_from(&(q.numerator_ref() % &p)).ok()?;
    let d = u64::try_from(&(q.denominator_ref() % &p)).ok()?;
    if d == 0 {
        return None;
    }
    let v = mul_mod(n, inv_mod(d));
    Some(if *q < 0u32 && v != 0 { PRIME - v } else { v })
}

/// Field operations needed by the time-stepping solvers.
pub trait Scalar: Clone + PartialEq + Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_q(q: &Q) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn add_assign_mul(&mut self, a: &Self, b: &Self) {
        *self = self.add(&a.mul(b));
    }
}

impl Scalar for Q {
    fn zero() -> Self {
        Rational::ZERO
    }
    fn one() -> Self {
        Rational::ONE
    }
    fn is_zero(&self) -> bool {
        *self == 0u32
    }
    fn from_q(q: &Q) -> Self {
        q.clone()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn add_assign_mul(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn from_q(q: &Q) -> Self {
        to_f64(q)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        for q in [frac(3, 4), int(-5), zero(), frac(-7, 12)] {
            assert_eq!(parse_q(&format_q(&q)).unwrap(), q);
        }
        assert_eq!(format_q(&int(2)), "2/1");
        assert_eq!(format_q(&frac(-2, 6)), "-1/3");
        assert!(parse_q("1.5").is_err());
        assert!(parse_q("").is_err());
    }

    #[test]
    fn prime_field_image() {
        let h = to_mod_p(&frac(1, 2)).unwrap();
        assert_eq!(mul_mod(h, 2), 1);
        let m = to_mod_p(&frac(-3, 4)).unwrap();
        assert_eq!(mul_mod(m, 4), PRIME - 3);
        assert_eq!(to_mod_p(&zero()), Some(0));
    }

    #[test]
    fn float_conversion() {
        assert_eq!(to_f64(&frac(1, 4)), 0.25);
        assert_eq!(<f64 as Scalar>::from_q(&frac(-3, 2)), -1.5);
    }
}
