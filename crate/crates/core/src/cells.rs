//! Asymptotic data of the lowest two-sided cell: γ-constants, Δ, n_z, the
//! distinguished involutions, left-cell labels and the property suite.
//!
//! All data is read off a [`KlTable`]; a property checked on `c₀ ∩ ball(R)`
//! needs products of length `2R`, so the table radius must be at least `2R`.

use std::sync::{Arc, Mutex};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;
use serde_json::Value;

use crate::affine::{AffineElement, C0Factor, CellDatum};
use crate::error::{Error, Result};
use crate::gamma::{Degree, GammaElement, Laurent};
use crate::hecke::{Hecke, HeckeElement};
use crate::int::Int;
use crate::kl::{CVec, KlTable, NONE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Property {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7,
    P8,
    P13,
    P15,
    DEG32,
    DEG33,
}

impl Property {
    pub const ALL: [Property; 12] = [
        Property::P1,
        Property::P2,
        Property::P3,
        Property::P4,
        Property::P5,
        Property::P6,
        Property::P7,
        Property::P8,
        Property::P13,
        Property::P15,
        Property::DEG32,
        Property::DEG33,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Property::P1 => "P1",
            Property::P2 => "P2",
            Property::P3 => "P3",
            Property::P4 => "P4",
            Property::P5 => "P5",
            Property::P6 => "P6",
            Property::P7 => "P7",
            Property::P8 => "P8",
            Property::P13 => "P13",
            Property::P15 => "P15",
            Property::DEG32 => "DEG32",
            Property::DEG33 => "DEG33",
        }
    }

    /// The identity being checked, stated in words.
    pub fn statement(&self) -> &'static str {
        match self {
            Property::P1 => "Delta(z) >= L(w0) on the lowest cell, with equality exactly on the distinguished involutions",
            Property::P2 => "gamma(x,y,d) != 0 for d distinguished forces x = y^-1",
            Property::P3 => "for each y there is exactly one distinguished d with gamma(y^-1,y,d) != 0",
            Property::P4 => "the lowest cell is the set where the a-function equals L(w0) (empirical outside the cell)",
            Property::P5 => "gamma(y^-1,y,d) != 0 implies gamma(y^-1,y,d) = n_d = 1",
            Property::P6 => "every distinguished involution squares to the identity",
            Property::P7 => "cyclic symmetry gamma(x,y,z) = gamma(y,z,x)",
            Property::P8 => "gamma(x,y,z) != 0 implies x ~L y^-1, y ~L z^-1, z ~L x^-1",
            Property::P13 => "each left cell holds one distinguished d and gamma(x^-1,x,d) != 0 on it",
            Property::P15 => "sum h(x,y',y) (x) h(w,x',y') = sum h(x,w,y') (x) h(y',x',y) over the lowest cell",
            Property::DEG32 => "alcove-module coefficients of T_u on y A0 have degree < L(y) for u in the box",
            Property::DEG33 => "T_u T_y T_{u'^-1} has coefficients of degree < L(y w0) for u in the box, u' dominant",
        }
    }
}

impl std::str::FromStr for Property {
    type Err = Error;
    fn from_str(s: &str) -> Result<Property> {
        let t = s.trim().to_ascii_uppercase();
        Property::ALL
            .iter()
            .find(|p| p.name() == t || p.name().trim_start_matches('P') == t)
            .copied()
            .ok_or_else(|| Error::Config(format!("unknown property {s:?}")))
    }
}

/// `"all"` or a comma separated list of property names.
pub fn parse_props(s: &str) -> Result<Vec<Property>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(Property::ALL.to_vec());
    }
    s.split(',').filter(|t| !t.trim().is_empty()).map(|t| t.parse()).collect()
}

/// Table radius needed to run `props` on `ball(r)`: products of two ball
/// elements, the tensor identity's longer chains, and every distinguished involution.
pub fn suite_table_radius(d: &CellDatum, props: &[Property], r: u32, opts: &VerifyOptions) -> u32 {
    let top = d.box_elements().iter().map(|w| d.length(w)).max().unwrap_or(0);
    let mut need = 2 * r;
    if props.contains(&Property::P15) {
        need = need.max(r + 2 * opts.p15_len);
    }
    need.max(d.w0_length() + 2 * top)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampling {
    Exhaustive,
    Random { count: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub sampling: Sampling,
    /// `x, x'` in the tensor identity range over `ball(p15_len)`.
    pub p15_len: u32,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { sampling: Sampling::Exhaustive, p15_len: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail { witness: Vec<Value>, witness_names: Vec<String>, detail: String },
    Vacuous,
}

#[derive(Clone, Debug, Serialize)]
pub struct CellReport {
    pub property: String,
    pub statement: String,
    pub radius: u32,
    pub mode: String,
    pub empirical: bool,
    pub checked: usize,
    pub verdict: Verdict,
    /// Wall time; kept out of serialized reports so they are reproducible.
    #[serde(skip)]
    pub elapsed_ms: u128,
}

impl CellReport {
    pub fn passed(&self) -> bool {
        !matches!(self.verdict, Verdict::Fail { .. })
    }
}

/// Per-element data of the lowest cell.
#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticEntry {
    pub element: String,
    pub length: u32,
    pub a_empirical: Option<GammaElement>,
    /// `None` encodes `+∞` (`p̃_{e,z} = 0`).
    pub delta: Option<GammaElement>,
    pub n_z: Option<Int>,
    pub left_cell: usize,
    pub distinguished: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Distinguished {
    /// Index of `w` in the box set.
    pub box_index: usize,
    pub element: String,
    pub length: u32,
    pub involution: bool,
    pub delta_is_l_w0: bool,
    pub n_d: Option<Int>,
}

/// Tensor in ℤ[Γ]⊗ℤ[Γ], keyed by packed exponents.
pub type Tensor = FxHashMap<(u64, u64), Int>;

fn tensor_add(t: &mut Tensor, a: &Laurent, b: &Laurent) {
    for (ga, ca) in a.terms() {
        for (gb, cb) in b.terms() {
            let e = t.entry((ga.key(), gb.key())).or_insert_with(|| Int::from(0));
            *e += &(ca * cb);
        }
    }
}

fn tensor_clean(t: &mut Tensor) {
    t.retain(|_, c| !c.is_zero());
}

/// Coefficients of `q^{L(w₀)}` in `T̃_x T̃_y`, by target element. Monomials
/// that cannot reach degree `L(w₀)` with the remaining letters are dropped,
/// which is exact since each letter raises the top degree by at most `L(s)`.
pub fn tau_top(d: &CellDatum, x: &AffineElement, y: &AffineElement) -> FxHashMap<AffineElement, Int> {
    let h = Hecke::new(d);
    let lw0 = d.weight_length(&d.w0);
    let (k, word) = d.reduced_word(x);
    let mut rem = word.iter().fold(GammaElement::zero(d.gamma_rank), |a, &s| a.add(&d.weights[s]));
    let mut acc = HeckeElement::basis(*y, d.gamma_rank);
    for &s in word.iter().rev() {
        rem = rem.sub(&d.weights[s]);
        acc = h.left_gen(s, &acc);
        let floor = lw0.sub(&rem);
        acc.terms.retain(|_, c| {
            *c = c.at_least(&floor);
            !c.is_zero()
        });
    }
    if k != 0 {
        acc = h.left_length_zero(&d.omega[k], &acc);
    }
    acc.terms.iter().map(|(w, c)| (*w, c.coeff(&lw0))).filter(|(_, c)| !c.is_zero()).collect()
}

pub struct CellContext<'a> {
    pub table: &'a KlTable,
    pub lw0: GammaElement,
    e_idx: u32,
    fac: Vec<Option<C0Factor>>,
    /// `d_w = w w₀ w⁻¹` per box element, as a table index (NONE outside the table).
    dist: Vec<u32>,
    dist_set: FxHashSet<u32>,
    structures: Mutex<FxHashMap<(u32, u32), Arc<CVec>>>,
}

impl<'a> CellContext<'a> {
    pub fn new(table: &'a KlTable) -> CellContext<'a> {
        let d = &*table.datum;
        let fac: Vec<Option<C0Factor>> =
            (0..table.size() as u32).into_par_iter().map(|i| d.c0_factorize(&table.elem(i))).collect();
        let dist: Vec<u32> = d
            .box_elements()
            .iter()
            .map(|w| table.index_of(&d.mul(&d.mul(w, &d.w0), &d.inverse(w))).unwrap_or(NONE))
            .collect();
        let dist_set = dist.iter().copied().filter(|&i| i != NONE).collect();
        CellContext {
            table,
            lw0: d.weight_length(&d.w0),
            e_idx: table.index_of(&d.identity()).expect("identity is in every ball"),
            fac,
            dist,
            dist_set,
            structures: Mutex::new(FxHashMap::default()),
        }
    }

    fn name(&self, i: u32) -> String {
        self.table.datum.element_name(&self.table.elem(i))
    }

    pub fn factor(&self, i: u32) -> Option<&C0Factor> {
        self.fac[i as usize].as_ref()
    }

    pub fn in_c0(&self, i: u32) -> bool {
        self.fac[i as usize].is_some()
    }

    /// `c₀ ∩ ball(r)` as table indices.
    pub fn members(&self, r: u32) -> Vec<u32> {
        self.table.ball_indices(r).filter(|&i| self.in_c0(i)).collect()
    }

    pub fn left_cell_of(&self, z: &AffineElement) -> Result<usize> {
        let d = &*self.table.datum;
        match self.table.index_of(z).and_then(|i| self.factor(i).cloned()).or_else(|| d.c0_factorize(z)) {
            Some(f) => Ok(f.w2),
            None => Err(Error::Domain(format!("{} is not in the lowest cell", d.element_name(z)))),
        }
    }

    fn label(&self, i: u32) -> usize {
        self.fac[i as usize].as_ref().expect("lowest-cell element").w2
    }

    /// `Δ(z) = −deg p̃_{e,z}`, `None` when `p̃_{e,z} = 0`.
    pub fn delta(&self, z: u32) -> Option<GammaElement> {
        self.table.kl_coeff(self.e_idx, z).deg().finite().map(|g| g.neg())
    }

    /// Coefficient of `q^{-Δ(z)}` in `p̃_{e,z}`.
    pub fn n_z(&self, z: u32) -> Option<Int> {
        let p = self.table.kl_coeff(self.e_idx, z);
        p.leading_coeff().cloned()
    }

    /// Table indices of `d_w`, ordered by box index.
    pub fn distinguished_indices(&self) -> Result<Vec<u32>> {
        let d = &*self.table.datum;
        self.dist
            .iter()
            .zip(d.box_elements())
            .map(|(&i, w)| {
                if i == NONE {
                    let dw = d.mul(&d.mul(w, &d.w0), &d.inverse(w));
                    Err(Error::Truncation {
                        what: "distinguished involution".into(),
                        needed: d.length(&dw) as usize,
                        have: self.table.radius as usize,
                    })
                } else {
                    Ok(i)
                }
            })
            .collect()
    }

    pub fn is_distinguished(&self, i: u32) -> bool {
        self.dist_set.contains(&i)
    }

    /// `{w w₀ w⁻¹ | w ∈ B₀}` with the checks `d² = e`, `Δ(d) = L(w₀)`, `n_d = 1`.
    pub fn distinguished_involutions(&self) -> Result<Vec<Distinguished>> {
        let d = &*self.table.datum;
        let idx = self.distinguished_indices()?;
        Ok(idx
            .iter()
            .enumerate()
            .map(|(b, &i)| {
                let e = self.table.elem(i);
                Distinguished {
                    box_index: b,
                    element: d.element_name(&e),
                    length: d.length(&e),
                    involution: d.mul(&e, &e) == d.identity(),
                    delta_is_l_w0: self.delta(i) == Some(self.lw0),
                    n_d: self.n_z(i),
                }
            })
            .collect())
    }

    fn check_product(&self, x: u32, y: u32) -> Result<()> {
        let n = self.table.length(x) + self.table.length(y);
        if n > self.table.radius {
            return Err(Error::Resource(format!(
                "product of lengths {} + {} needs table radius {n}, have {}",
                self.table.length(x),
                self.table.length(y),
                self.table.radius
            )));
        }
        Ok(())
    }

    /// `C_x C_y` in the C-basis, cached.
    pub fn structure(&self, x: u32, y: u32) -> Result<Arc<CVec>> {
        if let Some(v) = self.structures.lock().unwrap().get(&(x, y)) {
            return Ok(v.clone());
        }
        self.check_product(x, y)?;
        let v = Arc::new(self.table.structure(x, y)?);
        self.structures.lock().unwrap().insert((x, y), v.clone());
        Ok(v)
    }

    /// Fills the cache for all pairs, sharing one product engine per right factor.
    pub fn precompute(&self, xs: &[u32], ys: &[u32]) -> Result<()> {
        for &x in xs {
            for &y in ys {
                self.check_product(x, y)?;
            }
        }
        let have: FxHashSet<(u32, u32)> = self.structures.lock().unwrap().keys().copied().collect();
        let chunks: Vec<Vec<((u32, u32), Arc<CVec>)>> = ys
            .par_iter()
            .map(|&y| {
                let mut eng = self.table.engine(self.table.unit_c(y));
                let mut out = Vec::new();
                for &x in xs {
                    if !have.contains(&(x, y)) {
                        out.push(((x, y), eng.left_c(x)?));
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let mut m = self.structures.lock().unwrap();
        for c in chunks {
            m.extend(c);
        }
        Ok(())
    }

    fn top(&self, h: &Laurent) -> Int {
        h.coeff(&self.lw0)
    }

    /// `γ_{x,y,z}`: coefficient of `q^{L(w₀)}` in `h_{x,y,z⁻¹}` (no argument checks).
    fn gamma_raw(&self, x: u32, y: u32, z: u32) -> Result<Int> {
        let zi = self.table.inverse_index(z);
        let s = self.structure(x, y)?;
        Ok(s.get(&zi).map(|h| self.top(h)).unwrap_or_else(|| Int::from(0)))
    }

    fn require_c0(&self, w: &AffineElement) -> Result<u32> {
        let d = &*self.table.datum;
        let i = self.table.require_index(w, "lowest-cell element")?;
        if !self.in_c0(i) {
            return Err(Error::Domain(format!("{} is not in the lowest cell", d.element_name(w))));
        }
        Ok(i)
    }

    /// γ-constant by the h-route, cross-checked against the τ-route.
    pub fn gamma_const(&self, x: &AffineElement, y: &AffineElement, z: &AffineElement) -> Result<Int> {
        let (xi, yi, zi) = (self.require_c0(x)?, self.require_c0(y)?, self.require_c0(z)?);
        let a = self.gamma_raw(xi, yi, zi)?;
        let b = self.gamma_tau(x, y, z);
        if a != b {
            return Err(Error::Verification(format!(
                "γ routes disagree at ({}, {}, {}): {a} vs {b}",
                self.name(xi),
                self.name(yi),
                self.name(zi)
            )));
        }
        Ok(a)
    }

    pub fn tau_top(&self, x: &AffineElement, y: &AffineElement) -> FxHashMap<AffineElement, Int> {
        tau_top(&self.table.datum, x, y)
    }

    /// γ-constant as the coefficient of `q^{L(w₀)}` in `τ(T̃_x T̃_y T̃_z)`.
    pub fn gamma_tau(&self, x: &AffineElement, y: &AffineElement, z: &AffineElement) -> Int {
        let zi = self.table.datum.inverse(z);
        self.tau_top(x, y).remove(&zi).unwrap_or_else(|| Int::from(0))
    }

    /// Max of `deg h_{x,y,z}` over the given pairs, per table index `z`.
    pub fn degree_profile(&self, pairs: &[(u32, u32)]) -> Result<Vec<Degree>> {
        let n = self.table.size();
        let parts: Vec<Vec<Degree>> = pairs
            .par_chunks(64)
            .map(|ch| {
                let mut best = vec![Degree::NegInfinity; n];
                for &(x, y) in ch {
                    for (z, h) in self.structure(x, y)?.iter() {
                        let g = h.deg();
                        if g > best[*z as usize] {
                            best[*z as usize] = g;
                        }
                    }
                }
                Ok(best)
            })
            .collect::<Result<_>>()?;
        let mut best = vec![Degree::NegInfinity; n];
        for p in parts {
            for (b, g) in best.iter_mut().zip(p) {
                if g > *b {
                    *b = g;
                }
            }
        }
        Ok(best)
    }

    fn all_pairs(&self, r: u32) -> Vec<(u32, u32)> {
        let b: Vec<u32> = self.table.ball_indices(r).collect();
        b.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
    }

    /// Lower bound `max deg h_{x,y,z}` over `x, y ∈ ball(r)`.
    pub fn empirical_a(&self, z: &AffineElement, r: u32) -> Result<Degree> {
        let zi = self.table.require_index(z, "empirical a")?;
        let b: Vec<u32> = self.table.ball_indices(r).collect();
        self.precompute(&b, &b)?;
        Ok(self.degree_profile(&self.all_pairs(r))?[zi as usize])
    }

    /// Per-element asymptotic data on `c₀ ∩ ball(r)`.
    pub fn asymptotic_data(&self, r: u32) -> Result<Vec<AsymptoticEntry>> {
        let b: Vec<u32> = self.table.ball_indices(r).collect();
        self.precompute(&b, &b)?;
        let prof = self.degree_profile(&self.all_pairs(r))?;
        Ok(self
            .members(r)
            .into_iter()
            .map(|z| AsymptoticEntry {
                element: self.name(z),
                length: self.table.length(z),
                a_empirical: prof[z as usize].finite(),
                delta: self.delta(z),
                n_z: self.n_z(z),
                left_cell: self.label(z),
                distinguished: self.is_distinguished(z),
            })
            .collect())
    }

    /// Every `C_z` occurring in `C_s C_y` or `T̃_π C_y` (`y ∈ c₀`) lies in `c₀`
    /// with the label of `y`. Returns the number of edges checked.
    pub fn left_preorder_edges(&self, r: u32) -> Result<std::result::Result<usize, (u32, u32)>> {
        let t = self.table;
        let d = &*t.datum;
        let mut n = 0;
        for y in self.members(r) {
            let cy = t.unit_c(y);
            let mut outs = Vec::new();
            for s in 0..d.num_gens() {
                outs.push(t.left_c_gen(s, &cy)?);
            }
            for k in 0..d.omega.len() {
                outs.push(t.left_c_omega(k, &cy)?);
            }
            for o in outs {
                for z in o.keys() {
                    n += 1;
                    if !self.in_c0(*z) || self.label(*z) != self.label(y) {
                        return Ok(Err((y, *z)));
                    }
                }
            }
        }
        Ok(Ok(n))
    }

    /// Sizes of the left-cell classes of `c₀ ∩ ball(r)`, by box index.
    pub fn cell_census(&self, r: u32) -> Vec<usize> {
        let mut c = vec![0; self.table.datum.box_elements().len()];
        for z in self.members(r) {
            c[self.label(z)] += 1;
        }
        c
    }

    fn witness(&self, t: &[u32]) -> (Vec<Value>, Vec<String>) {
        let d = &*self.table.datum;
        (t.iter().map(|&i| d.element_to_json(&self.table.elem(i))).collect(), t.iter().map(|&i| self.name(i)).collect())
    }

    /// Checks one argument tuple; `Ok(None)` means the identity holds.
    pub fn check_tuple(&self, p: Property, t: &[u32]) -> Result<Option<String>> {
        let tab = self.table;
        let d = &*tab.datum;
        let zero = || Int::from(0);
        Ok(match p {
            Property::P1 => {
                let z = t[0];
                let delta = self.delta(z);
                let ge = delta.is_none_or(|g| g >= self.lw0);
                let eq = delta == Some(self.lw0);
                if !ge {
                    Some(format!("Delta = {:?} < L(w0)", delta))
                } else if eq != self.is_distinguished(z) {
                    Some("Delta = L(w0) does not match distinguished membership".into())
                } else {
                    None
                }
            }
            Property::P2 => {
                let g = self.gamma_raw(t[0], t[1], t[2])?;
                (!g.is_zero() && tab.inverse_index(t[1]) != t[0]).then(|| format!("gamma = {g} with x != y^-1"))
            }
            Property::P3 => {
                let y = t[0];
                let yi = tab.inverse_index(y);
                let mut hits = 0;
                for &dd in &self.dist {
                    if dd != NONE && !self.gamma_raw(yi, y, dd)?.is_zero() {
                        hits += 1;
                    }
                }
                (hits != 1).then(|| format!("{hits} distinguished involutions with gamma(y^-1,y,d) != 0"))
            }
            Property::P5 => {
                let (y, dd) = (t[0], t[1]);
                let g = self.gamma_raw(tab.inverse_index(y), y, dd)?;
                let nd = self.n_z(dd).unwrap_or_else(zero);
                (!g.is_zero() && !(g.is_one() && nd.is_one())).then(|| format!("gamma = {g}, n_d = {nd}"))
            }
            Property::P6 => {
                let e = tab.elem(t[0]);
                (d.mul(&e, &e) != d.identity()).then(|| "d^2 != e".to_string())
            }
            Property::P7 => {
                let a = self.gamma_raw(t[0], t[1], t[2])?;
                let b = self.gamma_raw(t[1], t[2], t[0])?;
                (a != b).then(|| format!("gamma(x,y,z) = {a}, gamma(y,z,x) = {b}"))
            }
            Property::P8 => {
                let g = self.gamma_raw(t[0], t[1], t[2])?;
                if g.is_zero() {
                    None
                } else {
                    let inv = |i: u32| tab.inverse_index(i);
                    let (x, y, z) = (t[0], t[1], t[2]);
                    let ok = self.label(x) == self.label(inv(y))
                        && self.label(y) == self.label(inv(z))
                        && self.label(z) == self.label(inv(x));
                    (!ok).then(|| format!("gamma = {g} but left-cell labels do not match"))
                }
            }
            Property::P13 => {
                let x = t[0];
                let dd = self.dist[self.label(x)];
                if dd == NONE {
                    Some("the distinguished involution of the cell lies outside the table".into())
                } else {
                    let g = self.gamma_raw(tab.inverse_index(x), x, dd)?;
                    g.is_zero().then(|| "gamma(x^-1,x,d) = 0 for the distinguished d of the cell".to_string())
                }
            }
            Property::P15 => self.check_p15(t[0], t[1], t[2])?,
            Property::P4 | Property::DEG32 | Property::DEG33 => {
                return Err(Error::Domain(format!("{} is not a tuple property", p.name())));
            }
        })
    }

    fn check_p15(&self, w: u32, x: u32, xp: u32) -> Result<Option<String>> {
        let mut lhs: FxHashMap<u32, Tensor> = FxHashMap::default();
        for (yp, h2) in self.structure(w, xp)?.iter() {
            if !self.in_c0(*yp) {
                continue;
            }
            for (y, h1) in self.structure(x, *yp)?.iter() {
                tensor_add(lhs.entry(*y).or_default(), h1, h2);
            }
        }
        let mut rhs: FxHashMap<u32, Tensor> = FxHashMap::default();
        for (yp, h1) in self.structure(x, w)?.iter() {
            if !self.in_c0(*yp) {
                continue;
            }
            for (y, h2) in self.structure(*yp, xp)?.iter() {
                tensor_add(rhs.entry(*y).or_default(), h1, h2);
            }
        }
        for m in [&mut lhs, &mut rhs] {
            for t in m.values_mut() {
                tensor_clean(t);
            }
            m.retain(|_, t| !t.is_empty());
        }
        if lhs == rhs {
            return Ok(None);
        }
        let mut bad: Vec<u32> = lhs.keys().chain(rhs.keys()).copied().filter(|y| lhs.get(y) != rhs.get(y)).collect();
        bad.sort();
        Ok(Some(format!("tensor identity fails at y = {}", self.name(bad[0]))))
    }

    /// Runs one property on `c₀ ∩ ball(r)`.
    pub fn verify(&self, p: Property, r: u32, opts: &VerifyOptions) -> Result<CellReport> {
        let start = Instant::now();
        let mode = match opts.sampling {
            Sampling::Exhaustive => "exhaustive".to_string(),
            Sampling::Random { count, seed } => format!("sampled({count}, seed {seed})"),
        };
        let mut empirical = false;
        let (checked, fail) = match p {
            Property::P4 => {
                empirical = true;
                self.run_p4(r, opts)?
            }
            Property::DEG32 => crate::degree::deg32(self.table)?,
            Property::DEG33 => crate::degree::deg33(self.table, r)?,
            _ => {
                let tuples = self.tuples(p, r, opts)?;
                self.sweep(p, &tuples)?
            }
        };
        let verdict = match fail {
            Some((t, detail)) => {
                let (witness, witness_names) = self.witness(&t);
                Verdict::Fail { witness, witness_names, detail }
            }
            None if checked == 0 => Verdict::Vacuous,
            None => Verdict::Pass,
        };
        Ok(CellReport {
            property: p.name().to_string(),
            statement: p.statement().to_string(),
            radius: r,
            mode,
            empirical,
            checked,
            verdict,
            elapsed_ms: start.elapsed().as_millis(),
        })
    }

    fn sweep(&self, p: Property, tuples: &[Vec<u32>]) -> Result<(usize, Option<(Vec<u32>, String)>)> {
        let fails: Vec<(Vec<u32>, String)> = tuples
            .par_iter()
            .filter_map(|t| match self.check_tuple(p, t) {
                Ok(None) => None,
                Ok(Some(m)) => Some(Ok((t.clone(), m))),
                Err(e) => Some(Err(e)),
            })
            .collect::<Result<_>>()?;
        Ok((tuples.len(), fails.into_iter().min_by(|a, b| a.0.cmp(&b.0))))
    }

    fn need_radius(&self, r: u32, extra: u32) -> Result<()> {
        let need = 2 * r + extra;
        if self.table.radius < need {
            return Err(Error::Resource(format!(
                "ball radius {r} needs products of length {need}; table radius is {}",
                self.table.radius
            )));
        }
        Ok(())
    }

    fn tuples(&self, p: Property, r: u32, opts: &VerifyOptions) -> Result<Vec<Vec<u32>>> {
        let m = self.members(r);
        let dist: Vec<u32> = self.dist.iter().copied().filter(|&i| i != NONE).collect();
        let mut rng = match opts.sampling {
            Sampling::Random { seed, .. } => Some(ChaCha8Rng::seed_from_u64(seed)),
            Sampling::Exhaustive => None,
        };
        let count = match opts.sampling {
            Sampling::Random { count, .. } => count,
            Sampling::Exhaustive => 0,
        };
        let pick = |rng: &mut ChaCha8Rng, v: &[u32]| v[rng.random_range(0..v.len())];
        let mut out: Vec<Vec<u32>> = Vec::new();
        match p {
            Property::P1 => out = m.iter().map(|&z| vec![z]).collect(),
            // Any d with γ_{y⁻¹,y,d} ≠ 0 has length ≤ 2l(y), so distinguished
            // involutions outside the table cannot contribute.
            Property::P6 => out = dist.iter().map(|&z| vec![z]).collect(),
            Property::P3 | Property::P13 => {
                self.need_radius(r, 0)?;
                out = m.iter().map(|&z| vec![z]).collect();
                if p == Property::P13 {
                    // One distinguished involution per cell, with matching label.
                    let nb = self.table.datum.box_elements().len();
                    for w in 0..nb {
                        let inside: Vec<u32> = dist.iter().copied().filter(|&i| self.label(i) == w).collect();
                        if inside.len() > 1 || (inside.is_empty() && self.dist[w] != NONE) {
                            return Err(Error::Verification(format!(
                                "left cell {w} holds {} distinguished involutions",
                                inside.len()
                            )));
                        }
                    }
                }
                if rng.is_none() {
                    let inv: Vec<u32> = m.iter().map(|&y| self.table.inverse_index(y)).collect();
                    self.precompute(&inv, &m)?;
                }
            }
            Property::P5 => {
                self.need_radius(r, 0)?;
                for &y in &m {
                    for &dd in &dist {
                        out.push(vec![y, dd]);
                    }
                }
            }
            Property::P2 | Property::P7 | Property::P8 => {
                self.need_radius(r, 0)?;
                if let Some(rng) = rng.as_mut() {
                    let third: &[u32] = if p == Property::P2 { &dist } else { &m };
                    for _ in 0..count {
                        out.push(vec![pick(rng, &m), pick(rng, &m), pick(rng, third)]);
                    }
                } else {
                    self.precompute(&m, &m)?;
                    let third: &[u32] = if p == Property::P2 { &dist } else { &m };
                    for &x in &m {
                        for &y in &m {
                            if p == Property::P8 {
                                // Only triples with nonzero γ can fail.
                                for z in self.nonzero_gamma_targets(x, y)? {
                                    if self.in_c0(z) && self.table.length(z) <= r {
                                        out.push(vec![x, y, z]);
                                    }
                                }
                            } else {
                                for &z in third {
                                    out.push(vec![x, y, z]);
                                }
                            }
                        }
                    }
                }
            }
            Property::P15 => {
                let k = opts.p15_len;
                let need = r + 2 * k;
                if self.table.radius < need {
                    return Err(Error::Resource(format!(
                        "tensor identity on ball {r} with sample length {k} needs table radius {need}, have {}",
                        self.table.radius
                    )));
                }
                let xs: Vec<u32> = self.table.ball_indices(k).collect();
                if let Some(rng) = rng.as_mut() {
                    for _ in 0..count {
                        out.push(vec![pick(rng, &m), pick(rng, &xs), pick(rng, &xs)]);
                    }
                } else {
                    for &w in &m {
                        for &x in &xs {
                            for &xp in &xs {
                                out.push(vec![w, x, xp]);
                            }
                        }
                    }
                }
            }
            Property::P4 | Property::DEG32 | Property::DEG33 => unreachable!(),
        }
        Ok(out)
    }

    /// `z` with `γ_{x,y,z} ≠ 0`.
    fn nonzero_gamma_targets(&self, x: u32, y: u32) -> Result<Vec<u32>> {
        let s = self.structure(x, y)?;
        Ok(s.iter().filter(|(_, h)| !self.top(h).is_zero()).map(|(z, _)| self.table.inverse_index(*z)).collect())
    }

    /// On `ball(r)`: `deg h ≤ L(w₀)` everywhere, `L(w₀)` attained on every
    /// lowest-cell element and never attained outside it.
    fn run_p4(&self, r: u32, opts: &VerifyOptions) -> Result<(usize, Option<(Vec<u32>, String)>)> {
        self.need_radius(r, 0)?;
        let tab = self.table;
        let d = &*tab.datum;
        let pairs: Vec<(u32, u32)> = match opts.sampling {
            Sampling::Exhaustive => {
                let b: Vec<u32> = tab.ball_indices(r).collect();
                self.precompute(&b, &b)?;
                self.all_pairs(r)
            }
            Sampling::Random { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let b: Vec<u32> = tab.ball_indices(r).collect();
                let mut v: Vec<(u32, u32)> = (0..count)
                    .map(|_| (b[rng.random_range(0..b.len())], b[rng.random_range(0..b.len())]))
                    .collect();
                // Attainment witnesses (w₁w₀, w₀p_xw₂⁻¹) for lowest-cell elements.
                for z in self.members(r) {
                    let f = self.factor(z).unwrap();
                    let a = d.mul(&d.box_elements()[f.w1], &d.w0);
                    let bb = d.mul(&d.mul(&d.w0, &d.translation(&f.x)), &d.inverse(&d.box_elements()[f.w2]));
                    v.push((tab.index_of(&a).unwrap(), tab.index_of(&bb).unwrap()));
                }
                v
            }
        };
        let prof = self.degree_profile(&pairs)?;
        let lw0 = Degree::Finite(self.lw0);
        let mut fail: Option<(Vec<u32>, String)> = None;
        for z in tab.ball_indices(2 * r) {
            let g = prof[z as usize];
            let msg = if g > lw0 {
                Some(format!("deg h = {:?} exceeds L(w0)", g))
            } else if tab.length(z) <= r && self.in_c0(z) && g != lw0 {
                Some(format!("empirical a = {:?} below L(w0) on the lowest cell", g))
            } else if !self.in_c0(z) && g == lw0 {
                Some("empirical a reaches L(w0) outside the lowest cell".into())
            } else {
                None
            };
            if let Some(m) = msg {
                fail = Some((vec![z], m));
                break;
            }
        }
        Ok((pairs.len(), fail))
    }
}
