//! Scalar fields for specializations: ℚ and 𝔽_p.
//!
//! A field is a context object; elements are plain values interpreted by it.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::int::Int;

pub trait Field: Clone + Debug + Send + Sync {
    type Elem: Clone + PartialEq + Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn from_int(&self, n: &Int) -> Self::Elem;
    /// Parses `"n"` or `"p/q"`.
    fn parse(&self, s: &str) -> Result<Self::Elem>;
    fn render(&self, a: &Self::Elem) -> String;
    fn name(&self) -> String;

    fn pow(&self, a: &Self::Elem, e: i64) -> Option<Self::Elem> {
        let base = if e < 0 { self.inv(a)? } else { a.clone() };
        let mut n = e.unsigned_abs();
        let mut acc = self.one();
        let mut b = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            n >>= 1;
        }
        Some(acc)
    }

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem> {
        Some(self.mul(a, &self.inv(b)?))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn from_int(&self, n: &Int) -> BigRational {
        BigRational::from_integer(n.to_bigint())
    }
    fn parse(&self, s: &str) -> Result<BigRational> {
        parse_rational(s)
    }
    fn render(&self, a: &BigRational) -> String {
        render_rational(a)
    }
    fn name(&self) -> String {
        "Q".to_string()
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

/// Canonical `"p/q"` rendering (always with a denominator).
/// `n/d` in lowest terms, or `n` for integers.
pub fn render_rational(a: &BigRational) -> String {
    a.to_string()
}

/// The prime field 𝔽_p, for p < 2^62.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<PrimeField> {
        if p < 2 || p >= 1 << 62 || !is_prime(p) {
            return Err(Error::Config(format!("{p} is not a supported prime")));
        }
        Ok(PrimeField { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    fn mulmod(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }
}

fn is_prime(n: u64) -> bool {
    if n < 4 {
        return n >= 2;
    }
    let mut d = 2u64;
    while d < 1000 && d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    // Bases up to 37 make Miller-Rabin deterministic below 2^64.
    d * d > n || miller_rabin(n)
}

fn miller_rabin(n: u64) -> bool {
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut a: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, a);
            }
            a = mul(a, a);
            e >>= 1;
        }
        r
    };
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow(a % n, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

impl Field for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.p
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        (a + self.p - b) % self.p
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        self.mulmod(*a, *b)
    }
    fn neg(&self, a: &u64) -> u64 {
        (self.p - a) % self.p
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            return None;
        }
        // Fermat: a^(p-2).
        let mut e = self.p - 2;
        let mut b = *a;
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mulmod(r, b);
            }
            b = self.mulmod(b, b);
            e >>= 1;
        }
        Some(r)
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn from_int(&self, n: &Int) -> u64 {
        n.rem_u64(self.p)
    }
    fn parse(&self, s: &str) -> Result<u64> {
        let r = parse_rational(s)?;
        let n = self.from_int(&Int::from(r.numer().clone()));
        let d = self.from_int(&Int::from(r.denom().clone()));
        self.div(&n, &d).ok_or_else(|| Error::Domain(format!("{s} has denominator divisible by {}", self.p)))
    }
    fn render(&self, a: &u64) -> String {
        a.to_string()
    }
    fn name(&self) -> String {
        format!("F_{}", self.p)
    }
}

/// Sign of a rational, for diagnostics.
pub fn rational_sign(a: &BigRational) -> i32 {
    if a.is_zero() {
        0
    } else if a.is_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parse_and_render() {
        let q = Rationals;
        let a = q.parse("6/4").unwrap();
        assert_eq!(q.render(&a), "3/2");
        assert!(q.parse("1/0").is_err());
        assert_eq!(q.render(&q.pow(&a, -2).unwrap()), "4/9");
    }

    #[test]
    fn prime_field_inverse() {
        let f = PrimeField::new(5).unwrap();
        assert_eq!(f.parse("1/2").unwrap(), 3);
        for a in 1..5 {
            assert_eq!(f.mul(&a, &f.inv(&a).unwrap()), 1);
        }
        assert!(PrimeField::new(6).is_err());
        assert!(PrimeField::new((1 << 61) - 1).is_ok());
    }
}
