//! The based ring `J₀` of the lowest cell in its matrix model over the
//! representation ring, and the homomorphism `φ: 𝓗 → ℤ[Γ] ⊗ J₀`.
//!
//! `t_{w₁w₀p_xw₂⁻¹}` is stored as `S_x I_{w₁,w₂}`; products use tensor
//! multiplicities only. The Hecke-side γ-constants are the oracle.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::affine::{AffineElement, C0Factor, CellDatum};
use crate::cells::CellContext;
use crate::error::{Error, Result};
use crate::field::{Field, PrimeField};
use crate::gamma::Laurent;
use crate::hecke::{Hecke, HeckeElement};
use crate::int::Int;
use crate::kl::CVec;
use crate::linalg;
use crate::root::Weight;

/// Coefficient rings for the matrix model.
pub trait Coeff: Clone + PartialEq + std::fmt::Debug + Send + Sync {
    fn is_zero(&self) -> bool;
    fn add_assign(&mut self, o: &Self);
    fn mul(&self, o: &Self) -> Self;
    fn times(&self, m: i64) -> Self;
}

impl Coeff for Int {
    fn is_zero(&self) -> bool {
        Int::is_zero(self)
    }
    fn add_assign(&mut self, o: &Self) {
        *self += o;
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn times(&self, m: i64) -> Self {
        self * &Int::from(m)
    }
}

impl Coeff for Laurent {
    fn is_zero(&self) -> bool {
        Laurent::is_zero(self)
    }
    fn add_assign(&mut self, o: &Self) {
        Laurent::add_assign(self, o);
    }
    fn mul(&self, o: &Self) -> Self {
        Laurent::mul(self, o)
    }
    fn times(&self, m: i64) -> Self {
        self.scale(&Int::from(m))
    }
}

/// Element `Σ c_x S_x` of the center, keyed by dominant weight.
pub type Rep<C> = BTreeMap<Weight, C>;

pub fn rep_add<C: Coeff>(a: &mut Rep<C>, x: &Weight, c: &C) {
    if c.is_zero() {
        return;
    }
    match a.get_mut(x) {
        Some(e) => {
            e.add_assign(c);
            if e.is_zero() {
                a.remove(x);
            }
        }
        None => {
            a.insert(x.clone(), c.clone());
        }
    }
}

/// Product in the representation ring: `S_x S_y = Σ m(x,y,z) S_z`.
pub fn rep_mul<C: Coeff>(d: &CellDatum, a: &Rep<C>, b: &Rep<C>) -> Result<Rep<C>> {
    let mut out = Rep::new();
    for (x, ca) in a {
        for (y, cb) in b {
            let c = ca.mul(cb);
            for (z, m) in d.center_tensor(x, y)?.iter() {
                rep_add(&mut out, z, &c.times(*m));
            }
        }
    }
    Ok(out)
}

/// `B₀ × B₀` matrix over the center; absent entries are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct J0Element<C> {
    pub entries: BTreeMap<(usize, usize), Rep<C>>,
}

impl<C: Coeff> Default for J0Element<C> {
    fn default() -> Self {
        J0Element { entries: BTreeMap::new() }
    }
}

impl<C: Coeff> J0Element<C> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.values().all(|r| r.is_empty())
    }

    /// Adds `c·S_x I_{w₁,w₂}`.
    pub fn add_term(&mut self, w1: usize, x: &Weight, w2: usize, c: &C) {
        let e = self.entries.entry((w1, w2)).or_default();
        rep_add(e, x, c);
        if e.is_empty() {
            self.entries.remove(&(w1, w2));
        }
    }

    pub fn add_assign(&mut self, o: &Self) {
        for ((a, b), r) in &o.entries {
            for (x, c) in r {
                self.add_term(*a, x, *b, c);
            }
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero();
        for ((a, b), r) in &self.entries {
            for (x, v) in r {
                out.add_term(*a, x, *b, &v.mul(c));
            }
        }
        out
    }

    /// Nonzero `(w₁, x, w₂, c)` in sorted order.
    pub fn terms(&self) -> Vec<(usize, Weight, usize, C)> {
        let mut v = Vec::new();
        for ((a, b), r) in &self.entries {
            for (x, c) in r {
                v.push((*a, x.clone(), *b, c.clone()));
            }
        }
        v
    }

    /// Whether this is `Σ_w r I_{w,w}` for a single center element `r`.
    pub fn scalar_part(&self, n: usize) -> Option<Rep<C>> {
        let r = self.entries.get(&(0, 0)).cloned().unwrap_or_default();
        let ok = self.entries.keys().all(|(a, b)| a == b)
            && (0..n).all(|w| self.entries.get(&(w, w)).cloned().unwrap_or_default() == r);
        ok.then_some(r)
    }
}

/// The matrix model over a fixed datum.
pub struct J0<'a> {
    pub datum: &'a CellDatum,
}

impl<'a> J0<'a> {
    pub fn new(datum: &'a CellDatum) -> J0<'a> {
        J0 { datum }
    }

    pub fn box_size(&self) -> usize {
        self.datum.box_elements().len()
    }

    /// `t_z` for `z` in the lowest cell.
    pub fn t<C: Coeff>(&self, z: &AffineElement, one: C) -> Result<J0Element<C>> {
        let f = self.datum.c0_factorize(z).ok_or_else(|| {
            Error::Domain(format!("{} is not in the lowest cell", self.datum.element_name(z)))
        })?;
        let mut e = J0Element::zero();
        e.add_term(f.w1, &f.x, f.w2, &one);
        Ok(e)
    }

    /// Boundary conversion to `Σ c_z t_z`.
    pub fn to_t_sum<C: Coeff>(&self, a: &J0Element<C>) -> Vec<(AffineElement, C)> {
        let mut v: Vec<_> = a.terms().into_iter().map(|(w1, x, w2, c)| (self.datum.compose(w1, &x, w2), c)).collect();
        v.sort_by(|p, q| p.0.cmp(&q.0));
        v
    }

    pub fn j_mul<C: Coeff>(&self, a: &J0Element<C>, b: &J0Element<C>) -> Result<J0Element<C>> {
        let mut out = J0Element::zero();
        for ((w1, w2), ra) in &a.entries {
            for ((w3, w4), rb) in &b.entries {
                if w2 != w3 {
                    continue;
                }
                let p = rep_mul(self.datum, ra, rb)?;
                for (x, c) in &p {
                    out.add_term(*w1, x, *w4, c);
                }
            }
        }
        Ok(out)
    }

    /// `Σ_{d∈𝒟} t_d = Σ_w S_0 I_{w,w}`.
    pub fn unit<C: Coeff>(&self, one: C) -> J0Element<C> {
        let zero: Weight = std::iter::repeat_n(0, self.datum.rank).collect();
        let mut e = J0Element::zero();
        for w in 0..self.box_size() {
            e.add_term(w, &zero, w, &one);
        }
        e
    }

    /// `δ_{w₂,w₃} δ_{w₄,w₆} δ_{w₅,w₁} m(x, x', x'')`: the predicted `γ_{u,u',u''⁻¹}`.
    pub fn gamma_predict(&self, u: &AffineElement, up: &AffineElement, upp: &AffineElement) -> Result<i64> {
        let d = self.datum;
        let f = |z: &AffineElement| {
            d.c0_factorize(z).ok_or_else(|| Error::Domain(format!("{} is not in the lowest cell", d.element_name(z))))
        };
        self.gamma_predict_factored(&f(u)?, &f(up)?, &f(upp)?)
    }

    pub fn gamma_predict_factored(&self, a: &C0Factor, b: &C0Factor, c: &C0Factor) -> Result<i64> {
        if a.w2 != b.w1 || b.w2 != c.w2 || c.w1 != a.w1 {
            return Ok(0);
        }
        self.datum.center_multiplicity(&a.x, &b.x, &c.x)
    }
}

/// `φ(C_x) = Σ_{d∈𝒟, z} h_{x,d,z} t_z`.
pub fn phi_c(cx: &CellContext, x: u32) -> Result<J0Element<Laurent>> {
    let d = &*cx.table.datum;
    let mut out = J0Element::zero();
    for dd in cx.distinguished_indices()? {
        for (z, h) in cx.structure(x, dd)?.iter() {
            let f = cx.factor(*z).ok_or_else(|| {
                Error::Verification(format!("{} occurs in C_x C_d outside the lowest cell", d.element_name(&cx.table.elem(*z))))
            })?;
            out.add_term(f.w1, &f.x, f.w2, h);
        }
    }
    Ok(out)
}

/// `φ` on a C-basis vector.
pub fn phi_cvec(cx: &CellContext, v: &CVec) -> Result<J0Element<Laurent>> {
    let mut keys: Vec<u32> = v.keys().copied().collect();
    keys.sort();
    let mut out = J0Element::zero();
    for x in keys {
        out.add_assign(&phi_c(cx, x)?.scale(&v[&x]));
    }
    Ok(out)
}

pub fn phi(cx: &CellContext, h: &HeckeElement) -> Result<J0Element<Laurent>> {
    phi_cvec(cx, &cx.table.t_to_c(h)?)
}

/// `t_x t_y` from the Hecke-side γ-constants: `Σ_z γ_{x,y,z⁻¹} t_z`.
pub fn gamma_product(cx: &CellContext, x: u32, y: u32) -> Result<J0Element<Int>> {
    let mut out = J0Element::zero();
    for (z, h) in cx.structure(x, y)?.iter() {
        let g = h.coeff(&cx.lw0);
        if g.is_zero() {
            continue;
        }
        let f = cx.factor(*z).ok_or_else(|| Error::Verification("γ-support leaves the lowest cell".into()))?;
        out.add_term(f.w1, &f.x, f.w2, &g);
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaTriple {
    pub u: String,
    pub u_prime: String,
    pub u_second: String,
    pub hecke: Int,
    pub predicted: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaCheck {
    pub radius: u32,
    pub elements: usize,
    pub triples: usize,
    pub nonzero: usize,
    pub mismatches: Vec<GammaTriple>,
    /// Pairs whose full τ-route product was compared with the h-route.
    pub route_pairs: usize,
    pub route_mismatches: usize,
    pub max_multiplicity: i64,
    pub max_multiplicity_witness: Option<GammaTriple>,
    /// Nonzero triples, listed only when requested.
    pub listed: Vec<GammaTriple>,
    #[serde(skip)]
    pub elapsed_ms: u128,
}

impl GammaCheck {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.route_mismatches == 0
    }
}

/// `γ_{u,u',u''⁻¹}` against `gamma_predict(u,u',u'')` for all triples in
/// `c₀ ∩ ball(r)`, plus the τ-route on every pair.
pub fn gamma_check(cx: &CellContext, r: u32, list: bool) -> Result<GammaCheck> {
    let start = Instant::now();
    let t = cx.table;
    let d = &*t.datum;
    let j = J0::new(d);
    let m = cx.members(r);
    cx.precompute(&m, &m)?;
    let name = |i: u32| d.element_name(&t.elem(i));
    let per_x: Vec<Result<(usize, usize, Vec<GammaTriple>, i64, Option<GammaTriple>, Vec<GammaTriple>, usize)>> = m
        .par_iter()
        .map(|&x| {
            let (mut triples, mut nonzero, mut bad, mut listed) = (0, 0, Vec::new(), Vec::new());
            let (mut best, mut best_w) = (0i64, None);
            let mut route_bad = 0;
            for &y in &m {
                let s = cx.structure(x, y)?;
                let tau = cx.tau_top(&t.elem(x), &t.elem(y));
                let mut agree = true;
                for &z in &m {
                    triples += 1;
                    let g = s.get(&z).map(|h| h.coeff(&cx.lw0)).unwrap_or_default();
                    let p = j.gamma_predict_factored(cx.factor(x).unwrap(), cx.factor(y).unwrap(), cx.factor(z).unwrap())?;
                    let gt = tau.get(&t.elem(z)).cloned().unwrap_or_default();
                    agree &= gt == g;
                    let mk = || GammaTriple { u: name(x), u_prime: name(y), u_second: name(z), hecke: g.clone(), predicted: p };
                    if g != Int::from(p) {
                        bad.push(mk());
                    }
                    if !g.is_zero() {
                        nonzero += 1;
                        if list {
                            listed.push(mk());
                        }
                    }
                    if p > best {
                        best = p;
                        best_w = Some(mk());
                    }
                }
                // Targets outside the ball must agree as well.
                for (w, c) in &tau {
                    if let Some(zi) = t.index_of(w) {
                        if s.get(&zi).map(|h| h.coeff(&cx.lw0)).unwrap_or_default() != *c {
                            agree = false;
                        }
                    } else {
                        agree = false;
                    }
                }
                if !agree {
                    route_bad += 1;
                }
            }
            Ok((triples, nonzero, bad, best, best_w, listed, route_bad))
        })
        .collect();
    let mut out = GammaCheck {
        radius: r,
        elements: m.len(),
        triples: 0,
        nonzero: 0,
        mismatches: Vec::new(),
        route_pairs: m.len() * m.len(),
        route_mismatches: 0,
        max_multiplicity: 0,
        max_multiplicity_witness: None,
        listed: Vec::new(),
        elapsed_ms: 0,
    };
    for r in per_x {
        let (a, b, bad, best, bw, listed, rb) = r?;
        out.triples += a;
        out.nonzero += b;
        out.mismatches.extend(bad);
        out.listed.extend(listed);
        out.route_mismatches += rb;
        if best > out.max_multiplicity {
            out.max_multiplicity = best;
            out.max_multiplicity_witness = bw;
        }
    }
    out.elapsed_ms = start.elapsed().as_millis();
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct PhiCheck {
    pub pairs: usize,
    pub multiplicative: bool,
    pub unital: bool,
    /// `φ(C_{w₀}) = Σ h_{w₀,ww₀,w₀p_x} t_{w₀p_xw⁻¹}`.
    pub phi_w0: bool,
    /// `φ(S_x)` is the scalar matrix `S_x · Id`.
    pub center_scalar: bool,
    pub center_checked: usize,
    /// Matrix model agrees with the γ-product on sampled pairs.
    pub matrix_model: bool,
    pub failures: Vec<String>,
}

impl PhiCheck {
    pub fn passed(&self) -> bool {
        self.multiplicative && self.unital && self.phi_w0 && self.center_scalar && self.matrix_model
    }
}

/// Random pairs from `ball(r)`, chosen so that products stay inside the table.
pub fn phi_check(cx: &CellContext, r: u32, pairs: usize, seed: u64) -> Result<PhiCheck> {
    let t = cx.table;
    let d = &*t.datum;
    let j = J0::new(d);
    let h = Hecke::new(d);
    let dist = cx.distinguished_indices()?;
    let ld = dist.iter().map(|&i| t.length(i)).max().unwrap_or(0);
    if 2 * r + ld > t.radius {
        return Err(Error::Resource(format!(
            "phi on ball {r} needs table radius {}, have {}",
            2 * r + ld,
            t.radius
        )));
    }
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ball: Vec<u32> = t.ball_indices(r).collect();
    let sample: Vec<(u32, u32)> =
        (0..pairs).map(|_| (ball[rng.random_range(0..ball.len())], ball[rng.random_range(0..ball.len())])).collect();
    let bad: Vec<String> = sample
        .par_iter()
        .map(|&(x, y)| -> Result<Option<String>> {
            let lhs = phi_cvec(cx, &*cx.structure(x, y)?)?;
            let rhs = j.j_mul(&phi_c(cx, x)?, &phi_c(cx, y)?)?;
            Ok((lhs != rhs).then(|| format!("phi(C_x C_y) != phi(C_x) phi(C_y) at ({}, {})", d.element_name(&t.elem(x)), d.element_name(&t.elem(y)))))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let multiplicative = bad.is_empty();
    failures.extend(bad);
    let e = t.require_index(&d.identity(), "identity")?;
    let unital = phi_c(cx, e)? == j.unit(Laurent::one(d.gamma_rank));
    if !unital {
        failures.push("phi(1) is not the unit".into());
    }
    // φ(C_{w₀}) closed form.
    let w0 = t.require_index(&d.w0, "w0")?;
    let mut expect = J0Element::zero();
    for (wi, w) in d.box_elements().iter().enumerate() {
        let ww0 = t.require_index(&d.mul(w, &d.w0), "w w0")?;
        for (z, hv) in cx.structure(w0, ww0)?.iter() {
            // Targets w₀p_x are exactly the lowest-cell elements with w₁ = w₂ = e.
            let f = cx.factor(*z).unwrap();
            if d.box_elements()[f.w1] == d.identity() && d.box_elements()[f.w2] == d.identity() {
                expect.add_term(f.w1, &f.x, wi, hv);
            }
        }
    }
    let phi_w0 = phi_c(cx, w0)? == expect;
    if !phi_w0 {
        failures.push("phi(C_w0) differs from its closed form".into());
    }
    // φ(S_x) on dominant weights with small support in the table.
    let mut center_scalar = true;
    let mut center_checked = 0;
    for x in small_dominant(d, 2) {
        let sx = h.s_elem(&x)?;
        let Ok(cv) = t.t_to_c(&sx) else { continue };
        if cv.keys().any(|&i| t.length(i) + ld > t.radius) {
            continue;
        }
        center_checked += 1;
        let img = phi_cvec(cx, &cv)?;
        let mut rep: Rep<Laurent> = Rep::new();
        rep.insert(x.clone(), Laurent::one(d.gamma_rank));
        if img.scalar_part(j.box_size()) != Some(rep) {
            center_scalar = false;
            failures.push(format!("phi(S_x) is not S_x Id at x = {x:?}"));
        }
    }
    // Matrix model versus the γ-product.
    let m = cx.members(t.radius / 2);
    let mut matrix_model = true;
    for _ in 0..pairs {
        let (x, y) = (m[rng.random_range(0..m.len())], m[rng.random_range(0..m.len())]);
        let lhs = gamma_product(cx, x, y)?;
        let rhs = j.j_mul(&j.t(&t.elem(x), Int::from(1))?, &j.t(&t.elem(y), Int::from(1))?)?;
        if lhs != rhs {
            matrix_model = false;
            failures.push(format!("matrix model disagrees with gamma product at {} * {}", d.element_name(&t.elem(x)), d.element_name(&t.elem(y))));
            break;
        }
    }
    Ok(PhiCheck { pairs, multiplicative, unital, phi_w0, center_scalar, center_checked, matrix_model, failures })
}

/// Admissible dominant weights with coordinate sum `<= n`.
pub fn small_dominant(d: &CellDatum, n: i64) -> Vec<Weight> {
    let r = d.rank;
    let mut out = Vec::new();
    let mut cur: Weight = std::iter::repeat_n(0, r).collect();
    fn rec(i: usize, left: i64, cur: &mut Weight, out: &mut Vec<Weight>, d: &CellDatum) {
        if i == cur.len() {
            if d.is_dominant_lattice(cur) {
                out.push(cur.clone());
            }
            return;
        }
        for v in 0..=left {
            cur[i] = v;
            rec(i + 1, left - v, cur, out, d);
        }
        cur[i] = 0;
    }
    rec(0, n, &mut cur, &mut out, d);
    out.sort_by_key(|w| (w.iter().sum::<i64>(), w.clone()));
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct InjectivityReport {
    pub radius: u32,
    pub ball_size: usize,
    pub columns: usize,
    pub rank: usize,
    /// `"specialization mod p"` when a random point certifies full rank,
    /// otherwise `"fraction-free elimination"`.
    pub method: String,
    pub full_rank: bool,
}

const CERT_PRIME: u64 = (1 << 61) - 1;

/// Rank of `{φ(C_w) | l(w) ≤ n}` over the fraction field of ℤ[Γ].
pub fn phi_injectivity_check(cx: &CellContext, n: u32, seed: u64) -> Result<InjectivityReport> {
    let t = cx.table;
    let d = &*t.datum;
    let rows: Vec<J0Element<Laurent>> = t.ball_indices(n).collect::<Vec<_>>().par_iter().map(|&w| phi_c(cx, w)).collect::<Result<_>>()?;
    let mut cols: BTreeMap<(usize, Weight, usize), usize> = BTreeMap::new();
    for r in &rows {
        for (a, x, b, _) in r.terms() {
            let k = cols.len();
            cols.entry((a, x, b)).or_insert(k);
        }
    }
    let col_of: FxHashMap<(usize, Weight, usize), usize> = cols.iter().map(|(k, v)| (k.clone(), *v)).collect();
    let dense: Vec<Vec<Laurent>> = rows
        .iter()
        .map(|r| {
            let mut v = vec![Laurent::zero(); cols.len()];
            for (a, x, b, c) in r.terms() {
                v[col_of[&(a, x, b)]] = c;
            }
            v
        })
        .collect();
    let f = PrimeField::new(CERT_PRIME)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point: Vec<u64> = (0..d.gamma_rank).map(|_| rng.random_range(2..CERT_PRIME - 1)).collect();
    let pt: Vec<<PrimeField as Field>::Elem> = point.iter().map(|&v| f.from_int(&Int::from(v as i64))).collect();
    let mut spec: Vec<Vec<_>> = dense.iter().map(|row| row.iter().map(|c| eval_laurent(&f, c, &pt)).collect()).collect();
    let rk = linalg::rank(&f, &mut spec);
    let (rank, method) = if rk == rows.len() {
        (rk, "specialization mod p".to_string())
    } else {
        (linalg::rank_laurent(dense), "fraction-free elimination".to_string())
    };
    Ok(InjectivityReport {
        radius: n,
        ball_size: rows.len(),
        columns: cols.len(),
        rank,
        method,
        full_rank: rank == rows.len(),
    })
}

/// Image of a Laurent polynomial under `q^{e} ↦ Π t_i^{e_i}`.
pub fn eval_laurent<F: Field>(f: &F, c: &Laurent, pt: &[F::Elem]) -> F::Elem {
    c.eval_with(
        f.zero(),
        |g| {
            let mut acc = f.one();
            for (v, e) in pt.iter().zip(g.exps()) {
                acc = f.mul(&acc, &f.pow(v, e).expect("specialization values are units"));
            }
            acc
        },
        |acc, k, m| f.add(&acc, &f.mul(&f.from_int(k), &m)),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct ProductLawReport {
    pub box_size: usize,
    pub weights: Vec<Vec<i64>>,
    pub pairs: usize,
    pub failures: Vec<String>,
    #[serde(skip)]
    pub elapsed_ms: u128,
}

/// `t_{w₁w₀p_xw₂⁻¹} t_{w₃w₀p_yw₄⁻¹} = Σ_z δ_{w₂,w₃} m(x,y,z) t_{w₁w₀p_zw₄⁻¹}`, with the
/// left side computed from the τ-route γ-constants (no KL table needed).
/// `w_stride > 1` keeps every `w_stride`-th box quadruple.
pub fn product_law_check(d: &CellDatum, max_sum: i64, w_stride: usize) -> Result<ProductLawReport> {
    let start = Instant::now();
    let j = J0::new(d);
    let nb = j.box_size();
    let xs = small_dominant(d, max_sum);
    let mut jobs = Vec::new();
    let mut k = 0usize;
    for w1 in 0..nb {
        for w2 in 0..nb {
            for w3 in 0..nb {
                for w4 in 0..nb {
                    k += 1;
                    if (k - 1) % w_stride.max(1) != 0 {
                        continue;
                    }
                    for x in &xs {
                        for y in &xs {
                            jobs.push((w1, x.clone(), w2, w3, y.clone(), w4));
                        }
                    }
                }
            }
        }
    }
    let failures: Vec<String> = jobs
        .par_iter()
        .map(|(w1, x, w2, w3, y, w4)| -> Result<Option<String>> {
            let u = d.compose(*w1, x, *w2);
            let up = d.compose(*w3, y, *w4);
            let tau = crate::cells::tau_top(d, &u, &up);
            let mut lhs = J0Element::<Int>::zero();
            for (z, c) in &tau {
                match d.c0_factorize(z) {
                    Some(f) => lhs.add_term(f.w1, &f.x, f.w2, c),
                    None => return Ok(Some(format!("top coefficient outside the lowest cell at {}", d.element_name(z)))),
                }
            }
            let mut ta = J0Element::zero();
            ta.add_term(*w1, x, *w2, &Int::from(1));
            let mut tb = J0Element::zero();
            tb.add_term(*w3, y, *w4, &Int::from(1));
            let rhs = j.j_mul(&ta, &tb)?;
            Ok((lhs != rhs).then(|| format!("product law fails for {} * {}", d.element_name(&u), d.element_name(&up))))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(ProductLawReport {
        box_size: nb,
        weights: xs.iter().map(|w| w.to_vec()).collect(),
        pairs: jobs.len(),
        failures,
        elapsed_ms: start.elapsed().as_millis(),
    })
}
