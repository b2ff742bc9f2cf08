//! Degree bounds for products starting in the box, via the alcove module.
//!
//! Alcoves are labelled by group elements: `a` stands for the alcove `a(A₀)`.
//! The type-labelled action is `g·a = a g⁻¹`, so `T̃_s a = a s` when `a s` lies
//! on the positive side of the common wall, and `a s + ξ_s a` otherwise.

use rustc_hash::FxHashMap;

use crate::affine::{AffineElement, CellDatum};
use crate::error::Result;
use crate::gamma::{GammaElement, Laurent};
use crate::hecke::{Hecke, HeckeElement};
use crate::kl::KlTable;

/// Element of the alcove module.
pub type AlcoveVec = FxHashMap<AffineElement, Laurent>;

pub struct AlcoveModule<'a> {
    pub datum: &'a CellDatum,
    xi: Vec<Laurent>,
}

impl<'a> AlcoveModule<'a> {
    pub fn new(datum: &'a CellDatum) -> AlcoveModule<'a> {
        let xi = Hecke::new(datum).xi;
        AlcoveModule { datum, xi }
    }

    /// `a s` is above `a`: the sample points differ by a positive multiple of a positive root.
    pub fn is_up(&self, a: &AffineElement, s: usize) -> bool {
        let d = self.datum;
        let p = d.act_sample(a);
        let q = d.act_sample(&d.mul(a, &d.gens[s]));
        let diff: Vec<i64> = q.iter().zip(&p).map(|(x, y)| x - y).collect();
        let c = d.root.alpha_coords_scaled(&diff);
        debug_assert!(c.iter().all(|&v| v >= 0) || c.iter().all(|&v| v <= 0));
        c.iter().all(|&v| v >= 0)
    }

    pub fn act_gen(&self, s: usize, v: &AlcoveVec) -> AlcoveVec {
        let d = self.datum;
        let mut out = AlcoveVec::default();
        for (a, c) in v {
            let b = d.mul(a, &d.gens[s]);
            out.entry(b).or_default().add_assign(c);
            if !self.is_up(a, s) {
                out.entry(*a).or_default().add_assign(&c.mul(&self.xi[s]));
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// `T̃_w v`, letters applied right to left.
    pub fn act(&self, w: &AffineElement, v: &AlcoveVec) -> AlcoveVec {
        let d = self.datum;
        let (k, word) = d.reduced_word(w);
        let mut acc = v.clone();
        for &s in word.iter().rev() {
            acc = self.act_gen(s, &acc);
        }
        if k != 0 {
            let pinv = d.inverse(&d.omega[k]);
            acc = acc.into_iter().map(|(a, c)| (d.mul(&a, &pinv), c)).collect();
        }
        acc
    }

    pub fn basis(&self, a: AffineElement) -> AlcoveVec {
        let mut v = AlcoveVec::default();
        v.insert(a, Laurent::one(self.datum.gamma_rank));
        v
    }
}

fn max_deg_below<'b, I: Iterator<Item = &'b Laurent>>(it: I, bound: &GammaElement) -> Option<String> {
    for c in it {
        if !c.deg().lt(bound) {
            return Some(format!("coefficient {c} has degree >= {bound}"));
        }
    }
    None
}

/// For `u` in the box and `y ∈ W₀∖{e}`, every coefficient of `T̃_u (y A₀⁺)` has degree `< L(y)`.
pub fn deg32(table: &KlTable) -> Result<(usize, Option<(Vec<u32>, String)>)> {
    let d = &*table.datum;
    let m = AlcoveModule::new(d);
    let mut checked = 0;
    let mut fails = Vec::new();
    for u in d.box_elements() {
        for yi in 0..d.weyl.order() {
            let y = d.finite(yi as u16);
            if y == d.identity() {
                continue;
            }
            let v = m.act(u, &m.basis(d.inverse(&y)));
            checked += 1;
            if let Some(msg) = max_deg_below(v.values(), &d.weight_length(&y)) {
                let ui = table.require_index(u, "box element")?;
                let yj = table.require_index(&y, "finite element")?;
                fails.push((vec![ui, yj], msg));
            }
        }
    }
    Ok((checked, fails.into_iter().min_by(|a, b| a.0.cmp(&b.0))))
}

/// For `u` in the box, `y < w₀` and `u' ∈ U₀ ∩ ball(r)`, every coefficient of
/// `T̃_u T̃_y T̃_{u'⁻¹}` has degree `< L(y w₀)`.
pub fn deg33(table: &KlTable, r: u32) -> Result<(usize, Option<(Vec<u32>, String)>)> {
    use rayon::prelude::*;
    let d = &*table.datum;
    let h = Hecke::new(d);
    let us: Vec<u32> = table.ball_indices(r.min(table.radius)).filter(|&i| d.is_in_u0(&table.elem(i))).collect();
    let ys: Vec<AffineElement> = (0..d.weyl.order()).map(|i| d.finite(i as u16)).filter(|y| *y != d.w0).collect();
    let mut jobs: Vec<(usize, usize, u32)> = Vec::new();
    for b in 0..d.box_elements().len() {
        for y in 0..ys.len() {
            jobs.extend(us.iter().map(|&u| (b, y, u)));
        }
    }
    let fails: Vec<(Vec<u32>, String)> = jobs
        .par_iter()
        .map(|&(b, yk, up)| {
            let u = d.box_elements()[b];
            let y = ys[yk];
            let upi = d.inverse(&table.elem(up));
            let right = HeckeElement::basis(d.mul(&y, &upi), d.gamma_rank);
            let prod = h.left_basis(&u, &right);
            let bound = d.weight_length(&d.mul(&y, &d.w0));
            match max_deg_below(prod.terms.values(), &bound) {
                None => Ok(None),
                Some(msg) => Ok(Some((
                    vec![table.require_index(&u, "box element")?, table.require_index(&y, "finite element")?, up],
                    msg,
                ))),
            }
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok((jobs.len(), fails.into_iter().min_by(|a, b| a.0.cmp(&b.0))))
}
