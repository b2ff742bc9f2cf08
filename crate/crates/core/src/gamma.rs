//! The totally ordered group Γ = ℤ^r (lexicographic order) and the Laurent
//! polynomial ring ℤ[Γ].
//!
//! A group element is packed into one `u64`: coordinate `i` occupies a field of
//! `width(r)` bits holding `e_i + 2^(width-1)`, most significant coordinate
//! first. Lexicographic order on exponents is then numeric order on keys, and
//! addition is key addition minus the key of zero, as long as every coordinate
//! stays within `±max_coord(r)`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::int::Int;

pub const MAX_RANK: usize = 4;

fn width(rank: usize) -> u32 {
    match rank {
        1 | 2 => 32,
        3 => 21,
        _ => 16,
    }
}

/// Largest absolute exponent a coordinate may carry.
pub fn max_coord(rank: usize) -> i64 {
    (1i64 << (width(rank) - 2)) - 1
}

#[inline]
fn kadd(a: u64, b: u64, z: u64) -> u64 {
    a.wrapping_add(b).wrapping_sub(z)
}

#[inline]
fn kneg(k: u64, z: u64) -> u64 {
    z.wrapping_mul(2).wrapping_sub(k)
}

fn zero_key(rank: usize) -> u64 {
    let w = width(rank);
    (0..rank).fold(0u64, |k, _| (k << w) | (1u64 << (w - 1)))
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GammaElement {
    rank: u8,
    key: u64,
}

impl GammaElement {
    pub fn new(exps: &[i64]) -> Result<GammaElement> {
        let r = exps.len();
        if r == 0 || r > MAX_RANK {
            return Err(Error::Config(format!("gamma rank must be in 1..={MAX_RANK}, got {r}")));
        }
        let m = max_coord(r);
        if exps.iter().any(|e| e.abs() > m) {
            return Err(Error::Config(format!("gamma exponent out of range ±{m}: {exps:?}")));
        }
        Ok(Self::pack(exps))
    }

    fn pack(exps: &[i64]) -> GammaElement {
        let r = exps.len();
        let w = width(r);
        let off = 1i64 << (w - 1);
        let key = exps.iter().fold(0u64, |k, &e| (k << w) | ((e + off) as u64));
        GammaElement { rank: r as u8, key }
    }

    pub fn zero(rank: usize) -> GammaElement {
        GammaElement { rank: rank as u8, key: zero_key(rank) }
    }

    pub fn rank(&self) -> usize {
        self.rank as usize
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    pub fn from_key(rank: usize, key: u64) -> GammaElement {
        GammaElement { rank: rank as u8, key }
    }

    pub fn exps(&self) -> SmallVec<[i64; 4]> {
        let r = self.rank();
        let w = width(r);
        let off = 1i64 << (w - 1);
        let mask = if w == 64 { u64::MAX } else { (1u64 << w) - 1 };
        let mut out: SmallVec<[i64; 4]> = (0..r)
            .map(|i| (((self.key >> (w as usize * (r - 1 - i))) & mask) as i64) - off)
            .collect();
        out.truncate(r);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.key == zero_key(self.rank())
    }

    /// Sign of the element in the lexicographic order.
    pub fn sign(&self) -> Ordering {
        self.key.cmp(&zero_key(self.rank()))
    }

    pub fn add(&self, other: &GammaElement) -> GammaElement {
        debug_assert_eq!(self.rank, other.rank);
        GammaElement { rank: self.rank, key: kadd(self.key, other.key, zero_key(self.rank())) }
    }

    pub fn neg(&self) -> GammaElement {
        GammaElement { rank: self.rank, key: kneg(self.key, zero_key(self.rank())) }
    }

    pub fn sub(&self, other: &GammaElement) -> GammaElement {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: i64) -> GammaElement {
        let e: SmallVec<[i64; 4]> = self.exps().iter().map(|x| x * k).collect();
        Self::pack(&e)
    }

    pub fn checked_add(&self, other: &GammaElement) -> Result<GammaElement> {
        if self.rank != other.rank {
            return Err(rank_mismatch(self.rank(), other.rank()));
        }
        let e: SmallVec<[i64; 4]> =
            self.exps().iter().zip(other.exps().iter()).map(|(a, b)| a + b).collect();
        GammaElement::new(&e)
    }
}

fn rank_mismatch(a: usize, b: usize) -> Error {
    Error::Config(format!("gamma rank mismatch: {a} vs {b}"))
}

/// Lexicographic comparison; elements of different rank are incomparable.
pub fn gamma_compare(a: &GammaElement, b: &GammaElement) -> Result<Ordering> {
    if a.rank != b.rank {
        return Err(rank_mismatch(a.rank(), b.rank()));
    }
    Ok(a.key.cmp(&b.key))
}

impl fmt::Debug for GammaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.exps().as_slice())
    }
}

impl fmt::Display for GammaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.exps();
        if e.len() == 1 {
            write!(f, "{}", e[0])
        } else {
            let parts: Vec<String> = e.iter().map(|x| x.to_string()).collect();
            write!(f, "({})", parts.join(","))
        }
    }
}

/// Degree of a Laurent polynomial; the zero polynomial has degree −∞.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Degree {
    NegInfinity,
    Finite(GammaElement),
}

impl Degree {
    pub fn finite(&self) -> Option<GammaElement> {
        match self {
            Degree::Finite(g) => Some(*g),
            Degree::NegInfinity => None,
        }
    }

    /// True iff the degree is strictly below `g`.
    pub fn lt(&self, g: &GammaElement) -> bool {
        match self {
            Degree::NegInfinity => true,
            Degree::Finite(d) => d.key < g.key,
        }
    }
}

impl PartialOrd for Degree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Degree {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Degree::NegInfinity, Degree::NegInfinity) => Ordering::Equal,
            (Degree::NegInfinity, _) => Ordering::Less,
            (_, Degree::NegInfinity) => Ordering::Greater,
            (Degree::Finite(a), Degree::Finite(b)) => a.cmp(b),
        }
    }
}

type Terms = SmallVec<[(u64, Int); 2]>;

/// Element of ℤ[Γ]. Terms are sorted by exponent, strictly descending, with no
/// zero coefficients. `rank` is 0 only for the zero polynomial built without a
/// rank.
#[derive(Clone, Default)]
pub struct Laurent {
    rank: u8,
    terms: Terms,
}

// The rank tag is irrelevant for comparison: it only disambiguates zero.
impl PartialEq for Laurent {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for Laurent {}

impl std::hash::Hash for Laurent {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.terms.hash(h)
    }
}

impl Laurent {
    pub fn zero() -> Laurent {
        Laurent { rank: 0, terms: SmallVec::new() }
    }

    pub fn constant(rank: usize, c: Int) -> Laurent {
        Laurent::monomial(GammaElement::zero(rank), c)
    }

    pub fn one(rank: usize) -> Laurent {
        Laurent::constant(rank, Int::ONE)
    }

    pub fn monomial(g: GammaElement, c: Int) -> Laurent {
        let mut terms = SmallVec::new();
        if !c.is_zero() {
            terms.push((g.key, c));
        }
        Laurent { rank: g.rank, terms }
    }

    /// The monomial q^g.
    pub fn q(g: GammaElement) -> Laurent {
        Laurent::monomial(g, Int::ONE)
    }

    /// Builds from arbitrary (exponent, coefficient) pairs, combining repeats.
    pub fn from_terms<I: IntoIterator<Item = (GammaElement, Int)>>(rank: usize, it: I) -> Laurent {
        let mut v: Vec<(u64, Int)> = it
            .into_iter()
            .map(|(g, c)| {
                debug_assert_eq!(g.rank(), rank);
                (g.key, c)
            })
            .collect();
        Laurent { rank: rank as u8, terms: normalize(&mut v) }
    }

    pub fn rank(&self) -> usize {
        self.rank as usize
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].1.is_one() && self.terms[0].0 == zero_key(self.rank())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (GammaElement, &Int)> + '_ {
        let r = self.rank();
        self.terms.iter().map(move |(k, c)| (GammaElement::from_key(r, *k), c))
    }

    pub fn deg(&self) -> Degree {
        match self.terms.first() {
            None => Degree::NegInfinity,
            Some((k, _)) => Degree::Finite(GammaElement::from_key(self.rank(), *k)),
        }
    }

    /// Lowest exponent present, if any.
    pub fn low_deg(&self) -> Option<GammaElement> {
        self.terms.last().map(|(k, _)| GammaElement::from_key(self.rank(), *k))
    }

    pub fn leading_coeff(&self) -> Option<&Int> {
        self.terms.first().map(|(_, c)| c)
    }

    pub fn coeff(&self, g: &GammaElement) -> Int {
        match self.terms.binary_search_by(|(k, _)| g.key.cmp(k)) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => Int::ZERO,
        }
    }

    fn merge_rank(&self, other: &Laurent) -> u8 {
        debug_assert!(self.rank == 0 || other.rank == 0 || self.rank == other.rank);
        self.rank.max(other.rank)
    }

    pub fn neg(&self) -> Laurent {
        Laurent { rank: self.rank, terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect() }
    }

    pub fn scale(&self, c: &Int) -> Laurent {
        if c.is_zero() {
            return Laurent { rank: self.rank, terms: SmallVec::new() };
        }
        Laurent { rank: self.rank, terms: self.terms.iter().map(|(k, x)| (*k, x * c)).collect() }
    }

    /// Multiplication by q^g.
    pub fn shift(&self, g: &GammaElement) -> Laurent {
        let z = zero_key(g.rank());
        Laurent { rank: g.rank, terms: self.terms.iter().map(|(k, c)| (kadd(*k, g.key, z), c.clone())).collect() }
    }

    /// The involution q^γ ↦ q^{−γ}.
    pub fn bar(&self) -> Laurent {
        let z = zero_key(self.rank());
        Laurent { rank: self.rank, terms: self.terms.iter().rev().map(|(k, c)| (kneg(*k, z), c.clone())).collect() }
    }

    pub fn is_bar_invariant(&self) -> bool {
        self.bar() == *self
    }

    /// Part supported on exponents strictly below `g`.
    pub fn below(&self, g: &GammaElement) -> Laurent {
        Laurent { rank: self.rank, terms: self.terms.iter().filter(|(k, _)| *k < g.key).cloned().collect() }
    }

    /// Part supported on exponents `>= g`.
    pub fn at_least(&self, g: &GammaElement) -> Laurent {
        Laurent { rank: self.rank, terms: self.terms.iter().filter(|(k, _)| *k >= g.key).cloned().collect() }
    }

    /// `x + bar(x)` built from the part of `self` of degree > 0 plus the
    /// constant term: the unique bar-invariant element agreeing with `self`
    /// in degrees `>= 0`.
    pub fn bar_symmetric_top(&self) -> Laurent {
        let z = zero_key(self.rank());
        let mut v: Vec<(u64, Int)> = Vec::new();
        for (k, c) in &self.terms {
            if *k > z {
                v.push((*k, c.clone()));
                v.push((kneg(*k, z), c.clone()));
            } else if *k == z {
                v.push((*k, c.clone()));
            }
        }
        Laurent { rank: self.rank, terms: normalize(&mut v) }
    }

    pub fn add_assign(&mut self, other: &Laurent) {
        if other.terms.is_empty() {
            return;
        }
        self.rank = self.merge_rank(other);
        if self.terms.is_empty() {
            self.terms = other.terms.clone();
            return;
        }
        if other.terms.len() == 1 {
            let (k, c) = &other.terms[0];
            self.add_term(*k, c);
            return;
        }
        self.terms = merge(&self.terms, &other.terms, false);
    }

    pub fn sub_assign(&mut self, other: &Laurent) {
        if other.terms.is_empty() {
            return;
        }
        self.rank = self.merge_rank(other);
        if other.terms.len() == 1 {
            let (k, c) = &other.terms[0];
            self.add_term(*k, &-c);
            return;
        }
        self.terms = merge(&self.terms, &other.terms, true);
    }

    fn add_term(&mut self, k: u64, c: &Int) {
        match self.terms.binary_search_by(|(x, _)| k.cmp(x)) {
            Ok(i) => {
                self.terms[i].1 += c;
                if self.terms[i].1.is_zero() {
                    self.terms.remove(i);
                }
            }
            Err(i) => self.terms.insert(i, (k, c.clone())),
        }
    }

    /// `self += a * b`.
    pub fn add_mul_assign(&mut self, a: &Laurent, b: &Laurent) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        if a.terms.len() == 1 && b.terms.len() == 1 {
            let z = zero_key(a.rank.max(b.rank) as usize);
            self.rank = self.merge_rank(a).max(b.rank);
            let k = kadd(a.terms[0].0, b.terms[0].0, z);
            let c = &a.terms[0].1 * &b.terms[0].1;
            self.add_term(k, &c);
            return;
        }
        let p = a.mul(b);
        self.add_assign(&p);
    }

    pub fn add_scaled_assign(&mut self, a: &Laurent, c: &Int) {
        if c.is_one() {
            self.add_assign(a);
        } else if !c.is_zero() {
            self.add_assign(&a.scale(c));
        }
    }

    pub fn mul(&self, other: &Laurent) -> Laurent {
        let rank = self.merge_rank(other);
        if self.is_zero() || other.is_zero() {
            return Laurent { rank, terms: SmallVec::new() };
        }
        let z = zero_key(rank as usize);
        let mut v: Vec<(u64, Int)> = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                v.push((kadd(*ka, *kb, z), ca * cb));
            }
        }
        if self.terms.len() == 1 || other.terms.len() == 1 {
            v.retain(|(_, c)| !c.is_zero());
            return Laurent { rank, terms: v.into_iter().collect() };
        }
        Laurent { rank, terms: normalize(&mut v) }
    }

    pub fn pow(&self, e: u32) -> Laurent {
        let mut acc = Laurent::one(self.rank().max(1));
        if self.rank() == 0 {
            return if e == 0 { acc } else { Laurent::zero() };
        }
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact division `self / d`; `None` if `d` does not divide `self` in ℤ[Γ].
    pub fn div_exact(&self, d: &Laurent) -> Option<Laurent> {
        if d.is_zero() {
            return None;
        }
        let rank = self.merge_rank(d);
        let mut rem = self.clone();
        let mut quot: Vec<(u64, Int)> = Vec::new();
        let z = zero_key(rank as usize);
        let (dk, dc) = d.terms[0].clone();
        let dlow = d.terms.last().unwrap().0;
        while let Some((rk, rc)) = rem.terms.first().cloned() {
            let low = rem.terms.last().unwrap().0;
            // Leading and trailing terms multiply separately in an ordered group.
            let qk = kadd(rk, z, dk);
            if qk < kadd(low, z, dlow) {
                return None;
            }
            let qc = rc.div_exact(&dc)?;
            let m = Laurent { rank, terms: SmallVec::from_vec(vec![(qk, qc.clone())]) };
            rem.sub_assign(&m.mul(d));
            quot.push((qk, qc));
            if quot.len() > 1 << 20 {
                return None;
            }
        }
        Some(Laurent { rank, terms: normalize(&mut quot) })
    }

    /// Evaluates with a caller-supplied monomial map.
    pub fn eval_with<T, F, M>(&self, zero: T, mut mono: M, mut fma: F) -> T
    where
        M: FnMut(GammaElement) -> T,
        F: FnMut(T, &Int, T) -> T,
    {
        let r = self.rank();
        let mut acc = zero;
        for (k, c) in &self.terms {
            acc = fma(acc, c, mono(GammaElement::from_key(r, *k)));
        }
        acc
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms()
            .map(|(g, c)| serde_json::json!({"exp": g.exps().to_vec(), "coeff": c.to_string()}))
            .collect();
        serde_json::json!({ "terms": terms })
    }

    pub fn from_json_value(v: &serde_json::Value) -> Result<Laurent> {
        let raw: LaurentJson = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        raw.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    exp: Vec<i64>,
    coeff: String,
}

#[derive(Serialize, Deserialize)]
struct LaurentJson {
    terms: Vec<TermJson>,
}

impl TryFrom<LaurentJson> for Laurent {
    type Error = Error;
    fn try_from(j: LaurentJson) -> Result<Laurent> {
        let rank = j.terms.first().map(|t| t.exp.len()).unwrap_or(0);
        let mut out = Vec::new();
        for t in j.terms {
            if t.exp.len() != rank {
                return Err(rank_mismatch(rank, t.exp.len()));
            }
            let c: Int = t.coeff.parse().map_err(|_| Error::Parse(format!("bad coefficient {:?}", t.coeff)))?;
            out.push((GammaElement::new(&t.exp)?, c));
        }
        Ok(if rank == 0 { Laurent::zero() } else { Laurent::from_terms(rank, out) })
    }
}

impl Serialize for Laurent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json_value().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Laurent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Laurent, D::Error> {
        let raw = LaurentJson::deserialize(d)?;
        raw.try_into().map_err(serde::de::Error::custom)
    }
}

fn normalize(v: &mut Vec<(u64, Int)>) -> Terms {
    v.sort_unstable_by(|a, b| b.0.cmp(&a.0));
    let mut out: Terms = SmallVec::with_capacity(v.len());
    for (k, c) in v.drain(..) {
        if let Some(last) = out.last_mut() {
            if last.0 == k {
                last.1 += &c;
                continue;
            }
        }
        out.push((k, c));
    }
    out.retain(|(_, c)| !c.is_zero());
    out
}

fn merge(a: &Terms, b: &Terms, negate_b: bool) -> Terms {
    let mut out: Terms = SmallVec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 > b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i == a.len() || b[j].0 > a[i].0 {
            let c = if negate_b { -&b[j].1 } else { b[j].1.clone() };
            out.push((b[j].0, c));
            j += 1;
        } else {
            let c = if negate_b { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
            if !c.is_zero() {
                out.push((a[i].0, c));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Multiplication in ℤ[Γ], checking ranks.
pub fn lp_mul(a: &Laurent, b: &Laurent) -> Result<Laurent> {
    if a.rank != 0 && b.rank != 0 && a.rank != b.rank {
        return Err(rank_mismatch(a.rank(), b.rank()));
    }
    Ok(a.mul(b))
}

pub fn lp_bar(a: &Laurent) -> Laurent {
    a.bar()
}

pub fn lp_deg(a: &Laurent) -> Degree {
    a.deg()
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (g, c) in self.terms() {
            let neg = c.signum() < 0;
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            if g.is_zero() {
                write!(f, "{a}")?;
            } else {
                if !a.is_one() {
                    write!(f, "{a}")?;
                }
                write!(f, "q^{g}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(e: &[i64]) -> GammaElement {
        GammaElement::new(e).unwrap()
    }

    #[test]
    fn packing_roundtrip_and_order() {
        for r in 1..=4usize {
            let m = max_coord(r);
            let a: Vec<i64> = (0..r as i64).map(|i| if i % 2 == 0 { -m } else { m }).collect();
            assert_eq!(g(&a).exps().to_vec(), a);
        }
        assert_eq!(gamma_compare(&g(&[1, -5]), &g(&[0, 7])).unwrap(), Ordering::Greater);
        assert!(gamma_compare(&g(&[1]), &g(&[1, 0])).is_err());
        assert_eq!(g(&[2, -3]).add(&g(&[-1, 1])), g(&[1, -2]));
        assert_eq!(g(&[2, -3]).neg(), g(&[-2, 3]));
    }

    #[test]
    fn laurent_basics() {
        let q = Laurent::q(g(&[1]));
        let qi = q.bar();
        let s = {
            let mut s = q.clone();
            s.add_assign(&qi);
            s
        };
        let sq = s.mul(&s);
        assert_eq!(sq.coeff(&g(&[0])), Int::from(2));
        assert_eq!(sq.deg(), Degree::Finite(g(&[2])));
        assert!(sq.is_bar_invariant());
        assert_eq!(sq.div_exact(&s), Some(s.clone()));
        assert_eq!(Laurent::zero().deg(), Degree::NegInfinity);
        assert_eq!(lp_deg(&Laurent::zero()), Degree::NegInfinity);
        let j = sq.to_json_value();
        assert_eq!(Laurent::from_json_value(&j).unwrap(), sq);
        assert_eq!(j["terms"][0]["exp"], serde_json::json!([2]));
    }
}

impl Serialize for GammaElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.exps().as_slice().serialize(s)
    }
}
