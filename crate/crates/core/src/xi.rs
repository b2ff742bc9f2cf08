//! Factorization of KL elements of the lowest cell through `C_{w₀}`.
//!
//! For `w ∈ U₀`, `E_w = Σ p̃_{uw₀,ww₀} T̃_u` over `u` with `l(uw₀) = l(u)+l(w₀)`,
//! so that `C_{ww₀} = E_w C_{w₀}`; `F_w = E_w^♭` gives `C_{w₀w⁻¹} = C_{w₀} F_w`.

use serde::Serialize;

use crate::affine::AffineElement;
use crate::error::{Error, Result};
use crate::gamma::Laurent;
use crate::hecke::{Hecke, HeckeElement};
use crate::kl::KlTable;

pub fn e_elem(table: &KlTable, w: &AffineElement) -> Result<HeckeElement> {
    let d = &*table.datum;
    let h = Hecke::new(d);
    h.require_u0(w)?;
    let ww0 = d.mul(w, &d.w0);
    let i = table.require_index(&ww0, "E_w")?;
    let l0 = d.w0_length();
    let mut out = HeckeElement::zero();
    for (y, p) in table.kl_coeffs(i) {
        let y = table.elem(*y);
        let u = d.mul(&y, &d.w0);
        if d.length(&u) + l0 == d.length(&y) {
            out.add_term(u, p);
        }
    }
    Ok(out)
}

pub fn f_elem(table: &KlTable, w: &AffineElement) -> Result<HeckeElement> {
    let e = e_elem(table, w)?;
    Ok(Hecke::new(&table.datum).flat(&e))
}

/// Both residuals of the decomposition of `C_{w₁w₀p_xw₂⁻¹}`.
#[derive(Clone, Debug)]
pub struct XiResidual {
    /// `C_z − E_{w₁} C_{w₀} S_x F_{w₂}`.
    pub factored: HeckeElement,
    /// `C_z − C_{w₁w₀w₂⁻¹} S_x`.
    pub central: HeckeElement,
}

impl XiResidual {
    pub fn is_zero(&self) -> bool {
        self.factored.is_zero() && self.central.is_zero()
    }
}

/// `w₁, w₂` are indices into the box set, `x` is dominant.
pub fn xi_verify(table: &KlTable, w1: usize, x: &[i64], w2: usize) -> Result<XiResidual> {
    let d = &*table.datum;
    if !d.is_dominant_lattice(x) {
        return Err(Error::Domain(format!("{x:?} is not an admissible dominant weight")));
    }
    let nb = d.box_elements().len();
    if w1 >= nb || w2 >= nb {
        return Err(Error::Domain("box index out of range".into()));
    }
    let h = Hecke::new(d);
    let z = d.compose(w1, x, w2);
    let cz = table.kl_element(&z)?;
    let c0 = table.kl_element(&d.w0)?;
    let sx = h.s_elem(x)?;
    let bw1 = d.box_elements()[w1];
    let bw2 = d.box_elements()[w2];
    let e = e_elem(table, &bw1)?;
    let f = f_elem(table, &bw2)?;
    let mid = h.mul(&c0, &sx);
    let full = h.mul(&h.mul(&e, &mid), &f);
    let mut factored = cz.clone();
    factored.sub_assign(&full);
    let base = d.compose(w1, &vec![0; d.rank], w2);
    let cb = table.kl_element(&base)?;
    let mut central = cz;
    central.sub_assign(&h.mul(&cb, &sx));
    Ok(XiResidual { factored, central })
}

#[derive(Clone, Debug, Serialize)]
pub struct XiSweep {
    pub checked: usize,
    pub nonzero: Vec<String>,
    pub max_length: u32,
}

/// `xi_verify` over every lowest-cell element of length `<= max_len`.
pub fn xi_sweep(table: &KlTable, max_len: u32) -> Result<XiSweep> {
    use rayon::prelude::*;
    let d = &*table.datum;
    let cands: Vec<_> = table
        .ball_indices(max_len)
        .filter_map(|i| d.c0_factorize(&table.elem(i)).map(|f| (i, f)))
        .collect();
    let res: Vec<Result<Option<String>>> = cands
        .par_iter()
        .map(|(i, f)| {
            let r = xi_verify(table, f.w1, &f.x, f.w2)?;
            Ok(if r.is_zero() { None } else { Some(d.element_name(&table.elem(*i))) })
        })
        .collect();
    let mut nonzero = Vec::new();
    for r in res {
        if let Some(n) = r? {
            nonzero.push(n);
        }
    }
    Ok(XiSweep { checked: cands.len(), nonzero, max_length: max_len })
}

/// `C_{zπ} = C_z T̃_π` for every pair inside the ball.
pub fn omega_twist_check(table: &KlTable) -> Result<usize> {
    let d = &*table.datum;
    let h = Hecke::new(d);
    let mut n = 0;
    for i in 0..table.size() as u32 {
        let z = table.elem(i);
        let cz = table.kl_element(&z)?;
        for pi in &d.omega {
            let zp = d.mul(&z, pi);
            if table.index_of(&zp).is_none() {
                continue;
            }
            if table.kl_element(&zp)? != h.right_length_zero(&cz, pi) {
                return Err(Error::Verification(format!("C_zπ ≠ C_z T̃_π at z = {}", d.element_name(&z))));
            }
            n += 1;
        }
    }
    Ok(n)
}

/// Closed forms on the finite parabolic part.
#[derive(Clone, Debug, Serialize)]
pub struct ClosedForms {
    /// `C_{w₀} = q_{w₀}^{-1} Σ_{y∈W₀} T_y`.
    pub c_w0: bool,
    /// `h_{w₀,w₀,w₀} = q_{w₀}^{-1} Σ_{y∈W₀} q_y²`.
    pub h_w0: bool,
    /// `C_s = T̃_s + q_s^{-1}` for every generator.
    pub c_s: bool,
    /// The same two identities for every standard parabolic subgroup.
    pub parabolic: bool,
    pub h_w0_value: Laurent,
}

pub fn closed_forms(table: &KlTable) -> Result<ClosedForms> {
    let d = &*table.datum;
    let h = Hecke::new(d);
    let rank = d.gamma_rank;
    let expected_c = |sub: &[usize]| -> (AffineElement, HeckeElement) {
        let wi = d.finite(d.parabolic_longest(sub));
        let lw = d.weight_length(&wi);
        let mut e = HeckeElement::zero();
        for u in d.parabolic(sub) {
            let y = d.finite(u);
            e.add_term(y, &Laurent::q(d.weight_length(&y).sub(&lw)));
        }
        (wi, e)
    };
    let mut parabolic = true;
    let (mut c_w0, mut h_w0) = (false, false);
    let mut h_w0_value = Laurent::zero();
    let r = d.rank;
    for mask in 0u32..(1 << r) {
        let sub: Vec<usize> = (1..=r).filter(|i| mask >> (i - 1) & 1 == 1).collect();
        let (wi, e) = expected_c(&sub);
        let i = table.require_index(&wi, "parabolic longest element")?;
        let okc = table.kl_element(&wi)? == e;
        let hv = table.h(i, i, i)?;
        let okh = hv == h.parabolic_poincare(&sub);
        if sub.len() == r {
            c_w0 = okc;
            h_w0 = okh;
            h_w0_value = hv;
        }
        parabolic &= okc && okh;
    }
    let mut c_s = true;
    for (s, g) in d.gens.iter().enumerate() {
        let mut e = HeckeElement::basis(*g, rank);
        e.add_term(d.identity(), &Laurent::q(d.weights[s].neg()));
        c_s &= table.kl_element(g)? == e;
    }
    Ok(ClosedForms { c_w0, h_w0, c_s, parabolic, h_w0_value })
}

/// `C_{uw₀} = S_x C_{w'w₀}` for `u ∈ U₀`, where `uw₀ = w'w₀p_x`.
pub fn free_module_check(table: &KlTable, max_len: u32) -> Result<usize> {
    let d = &*table.datum;
    let h = Hecke::new(d);
    let mut n = 0;
    for i in table.ball_indices(max_len) {
        let u = table.elem(i);
        if !d.is_in_u0(&u) {
            continue;
        }
        let z = d.mul(&u, &d.w0);
        if table.index_of(&z).is_none() {
            continue;
        }
        let f = d
            .c0_factorize(&z)
            .ok_or_else(|| Error::Verification(format!("{} is not in the lowest cell", d.element_name(&z))))?;
        if Some(f.w2) != d.box_index(&d.identity()) {
            return Err(Error::Verification(format!("{} has a nontrivial right box factor", d.element_name(&z))));
        }
        let base = d.mul(&d.box_elements()[f.w1], &d.w0);
        let rhs = h.mul(&h.s_elem(&f.x)?, &table.kl_element(&base)?);
        if table.kl_element(&z)? != rhs {
            return Err(Error::Verification(format!("C_uw0 ≠ S_x C_w'w0 at u = {}", d.element_name(&u))));
        }
        n += 1;
    }
    Ok(n)
}
