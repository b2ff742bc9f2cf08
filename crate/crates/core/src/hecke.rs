//! The generic affine Hecke algebra in the normalized basis `T̃_w = q_w^{-1} T_w`.
//!
//! Relations: `T̃_s T̃_w = T̃_{sw}` if `sw > w`, and `T̃_{sw} + ξ_s T̃_w` if
//! `sw < w`, where `ξ_s = q_s − q_s^{-1}`; `T̃_π` for `π ∈ Ω` just translates.

use std::fmt;

use rustc_hash::FxHashMap;
use serde_json::{json, Value};

use crate::affine::{AffineElement, CellDatum};
use crate::error::{Error, Result};
use crate::gamma::{GammaElement, Laurent};
use crate::int::Int;
use crate::root::Weight;

#[derive(Clone, Default)]
pub struct HeckeElement {
    pub terms: FxHashMap<AffineElement, Laurent>,
}

impl PartialEq for HeckeElement {
    fn eq(&self, other: &Self) -> bool {
        let nz = |h: &HeckeElement| h.terms.iter().filter(|(_, c)| !c.is_zero()).count();
        nz(self) == nz(other)
            && self.terms.iter().filter(|(_, c)| !c.is_zero()).all(|(w, c)| other.terms.get(w) == Some(c))
    }
}

impl fmt::Debug for HeckeElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by_key(|(w, _)| **w);
        f.debug_map().entries(v).finish()
    }
}

impl HeckeElement {
    pub fn zero() -> HeckeElement {
        HeckeElement::default()
    }

    pub fn basis(w: AffineElement, rank: usize) -> HeckeElement {
        let mut h = HeckeElement::zero();
        h.terms.insert(w, Laurent::one(rank));
        h
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| c.is_zero())
    }

    pub fn coeff(&self, w: &AffineElement) -> Laurent {
        self.terms.get(w).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, w: AffineElement, c: &Laurent) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(w).or_default();
        e.add_assign(c);
        if e.is_zero() {
            self.terms.remove(&w);
        }
    }

    pub fn add_assign(&mut self, other: &HeckeElement) {
        for (w, c) in &other.terms {
            self.add_term(*w, c);
        }
    }

    pub fn sub_assign(&mut self, other: &HeckeElement) {
        for (w, c) in &other.terms {
            self.add_term(*w, &c.neg());
        }
    }

    pub fn scale(&self, c: &Laurent) -> HeckeElement {
        let mut out = HeckeElement::zero();
        for (w, a) in &self.terms {
            out.add_term(*w, &a.mul(c));
        }
        out
    }

    /// Support sorted by element.
    pub fn sorted_terms(&self) -> Vec<(AffineElement, Laurent)> {
        let mut v: Vec<_> = self.terms.iter().filter(|(_, c)| !c.is_zero()).map(|(w, c)| (*w, c.clone())).collect();
        v.sort_by_key(|(w, _)| *w);
        v
    }

    /// Sum of the number of terms of all coefficients; 0 iff the element is 0.
    pub fn norm(&self) -> usize {
        self.terms.values().map(|c| c.len()).sum()
    }
}

/// Algebra operations over a fixed datum.
pub struct Hecke<'a> {
    pub datum: &'a CellDatum,
    pub q: Vec<Laurent>,
    pub qinv: Vec<Laurent>,
    pub xi: Vec<Laurent>,
    rank: usize,
}

impl<'a> Hecke<'a> {
    pub fn new(datum: &'a CellDatum) -> Hecke<'a> {
        let rank = datum.gamma_rank;
        let q: Vec<Laurent> = datum.weights.iter().map(|g| Laurent::q(*g)).collect();
        let qinv: Vec<Laurent> = datum.weights.iter().map(|g| Laurent::q(g.neg())).collect();
        let xi = q
            .iter()
            .zip(&qinv)
            .map(|(a, b)| {
                let mut x = a.clone();
                x.sub_assign(b);
                x
            })
            .collect();
        Hecke { datum, q, qinv, xi, rank }
    }

    pub fn gamma_rank(&self) -> usize {
        self.rank
    }

    pub fn one(&self) -> HeckeElement {
        HeckeElement::basis(self.datum.identity(), self.rank)
    }

    pub fn t(&self, w: &AffineElement) -> HeckeElement {
        HeckeElement::basis(*w, self.rank)
    }

    pub fn q_of(&self, g: &GammaElement) -> Laurent {
        Laurent::q(*g)
    }

    /// `T̃_s h`.
    pub fn left_gen(&self, s: usize, h: &HeckeElement) -> HeckeElement {
        let d = self.datum;
        let g = &d.gens[s];
        let mut out = HeckeElement::zero();
        for (y, c) in &h.terms {
            let sy = d.mul(g, y);
            out.add_term(sy, c);
            if d.length(&sy) < d.length(y) {
                out.add_term(*y, &c.mul(&self.xi[s]));
            }
        }
        out
    }

    /// `h T̃_s`.
    pub fn right_gen(&self, h: &HeckeElement, s: usize) -> HeckeElement {
        let d = self.datum;
        let g = &d.gens[s];
        let mut out = HeckeElement::zero();
        for (y, c) in &h.terms {
            let ys = d.mul(y, g);
            out.add_term(ys, c);
            if d.length(&ys) < d.length(y) {
                out.add_term(*y, &c.mul(&self.xi[s]));
            }
        }
        out
    }

    /// `T̃_s^{-1} h = T̃_s h − ξ_s h`.
    pub fn left_gen_inv(&self, s: usize, h: &HeckeElement) -> HeckeElement {
        let mut out = self.left_gen(s, h);
        out.sub_assign(&h.scale(&self.xi[s]));
        out
    }

    pub fn left_length_zero(&self, pi: &AffineElement, h: &HeckeElement) -> HeckeElement {
        let mut out = HeckeElement::zero();
        for (y, c) in &h.terms {
            out.add_term(self.datum.mul(pi, y), c);
        }
        out
    }

    pub fn right_length_zero(&self, h: &HeckeElement, pi: &AffineElement) -> HeckeElement {
        let mut out = HeckeElement::zero();
        for (y, c) in &h.terms {
            out.add_term(self.datum.mul(y, pi), c);
        }
        out
    }

    /// `T̃_w h`.
    pub fn left_basis(&self, w: &AffineElement, h: &HeckeElement) -> HeckeElement {
        let (k, word) = self.datum.reduced_word(w);
        let mut acc = h.clone();
        for &s in word.iter().rev() {
            acc = self.left_gen(s, &acc);
        }
        if k != 0 {
            acc = self.left_length_zero(&self.datum.omega[k], &acc);
        }
        acc
    }

    /// `h T̃_w`.
    pub fn right_basis(&self, h: &HeckeElement, w: &AffineElement) -> HeckeElement {
        let (k, word) = self.datum.reduced_word(w);
        let mut acc = if k != 0 { self.right_length_zero(h, &self.datum.omega[k]) } else { h.clone() };
        for &s in &word {
            acc = self.right_gen(&acc, s);
        }
        acc
    }

    /// Product; the factor with fewer terms is expanded letter by letter.
    pub fn mul(&self, a: &HeckeElement, b: &HeckeElement) -> HeckeElement {
        let mut out = HeckeElement::zero();
        if a.terms.len() <= b.terms.len() {
            for (x, c) in a.sorted_terms() {
                out.add_assign(&self.left_basis(&x, b).scale(&c));
            }
        } else {
            for (y, c) in b.sorted_terms() {
                out.add_assign(&self.right_basis(a, &y).scale(&c));
            }
        }
        out
    }

    /// `T̃_w^{-1} = T̃_{s_k}^{-1} ⋯ T̃_{s_1}^{-1} T̃_π^{-1}` for `w = π s_1 ⋯ s_k`.
    pub fn t_inv(&self, w: &AffineElement) -> HeckeElement {
        let d = self.datum;
        let (k, word) = d.reduced_word(w);
        let mut acc = self.t(&d.inverse(&d.omega[k]));
        for &s in &word {
            acc = self.left_gen_inv(s, &acc);
        }
        acc
    }

    /// `bar(T̃_w) = T̃_{w^{-1}}^{-1}`.
    pub fn bar_basis(&self, w: &AffineElement) -> HeckeElement {
        let d = self.datum;
        let (k, word) = d.reduced_word(w);
        let mut acc = self.one();
        for &s in word.iter().rev() {
            acc = self.left_gen_inv(s, &acc);
        }
        self.left_length_zero(&d.omega[k], &acc)
    }

    pub fn bar(&self, h: &HeckeElement) -> HeckeElement {
        let mut out = HeckeElement::zero();
        for (w, c) in h.sorted_terms() {
            out.add_assign(&self.bar_basis(&w).scale(&c.bar()));
        }
        out
    }

    /// Coefficient of `T̃_e`.
    pub fn tau(&self, h: &HeckeElement) -> Laurent {
        h.coeff(&self.datum.identity())
    }

    /// The ℤ[Γ]-linear anti-involution `T̃_w ↦ T̃_{w^{-1}}`.
    pub fn flat(&self, h: &HeckeElement) -> HeckeElement {
        let mut out = HeckeElement::zero();
        for (w, c) in &h.terms {
            out.add_term(self.datum.inverse(w), c);
        }
        out
    }

    /// `θ_x = T̃_{p_y} (T̃_{p_z})^{-1}` for `x = y − z` with `y = max(x, 0)`.
    pub fn theta(&self, x: &[i64]) -> HeckeElement {
        let y: Weight = x.iter().map(|&c| c.max(0)).collect();
        let z: Weight = x.iter().map(|&c| (-c).max(0)).collect();
        self.theta_split(&y, &z)
    }

    /// `T̃_{p_y} (T̃_{p_z})^{-1}` for dominant `y, z`.
    pub fn theta_split(&self, y: &[i64], z: &[i64]) -> HeckeElement {
        let d = self.datum;
        let inv = self.t_inv(&d.translation(z));
        self.left_basis(&d.translation(y), &inv)
    }

    /// `S_x = Σ_{x'} d(x', x) θ_{x'}`.
    pub fn s_elem(&self, x: &[i64]) -> Result<HeckeElement> {
        let mut out = HeckeElement::zero();
        for (w, m) in self.datum.center_weights(x)? {
            out.add_assign(&self.theta(&w).scale(&Laurent::constant(self.rank, Int::from(m))));
        }
        Ok(out)
    }

    /// `q_{w_I}^{-1} Σ_{y ∈ W_I} q_y^2` for a subset of the finite generators.
    pub fn parabolic_poincare(&self, subset: &[usize]) -> Laurent {
        let d = self.datum;
        let mut sum = Laurent::zero();
        for u in d.parabolic(subset) {
            let g = d.weight_length(&d.finite(u));
            sum.add_assign(&Laurent::q(g.scale(2)));
        }
        let wi = d.parabolic_longest(subset);
        sum.shift(&d.weight_length(&d.finite(wi)).neg())
    }

    pub fn to_json(&self, h: &HeckeElement) -> Value {
        let terms: Vec<Value> = h
            .sorted_terms()
            .into_iter()
            .map(|(w, c)| json!({"w": self.datum.element_to_json(&w), "coeff": c.to_json_value()}))
            .collect();
        json!({ "terms": terms })
    }

    /// Checks that `h` is central by commuting it with all generators and Ω.
    pub fn is_central(&self, h: &HeckeElement) -> bool {
        let d = self.datum;
        (0..d.num_gens()).all(|s| self.left_gen(s, h) == self.right_gen(h, s))
            && d.omega.iter().all(|pi| self.left_length_zero(pi, h) == self.right_length_zero(h, pi))
    }

    pub fn require_u0(&self, w: &AffineElement) -> Result<()> {
        if self.datum.is_in_u0(w) {
            Ok(())
        } else {
            Err(Error::Domain(format!("{} is not in U0", self.datum.element_name(w))))
        }
    }
}
