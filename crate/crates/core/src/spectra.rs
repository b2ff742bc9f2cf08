//! Specializations and torus points; the attached-simple classification data
//! and the `m`-matrix with its determinant.
//!
//! A torus point `t` gives `λ_t(S_x) = χ_x(t) = Σ d(x', x) t^{x'}` with
//! exponents taken in translation coordinates, so in non-extended mode the
//! characters are those of the center datum.

use std::collections::BTreeMap;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::affine::{CellDatum, Mode};
use crate::based_ring::{rep_add, rep_mul, Coeff, Rep};
use crate::cells::CellContext;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::gamma::{GammaElement, Laurent};
use crate::hecke::Hecke;
use crate::int::Int;
use crate::linalg;
use crate::root::Weight;

/// Ring map `ℤ[Γ] → k` sending the `i`-th coordinate generator to `values[i]`.
#[derive(Clone, Debug)]
pub struct Specialization<F: Field> {
    pub field: F,
    pub values: Vec<F::Elem>,
}

impl<F: Field> Specialization<F> {
    pub fn new(field: F, values: Vec<F::Elem>) -> Result<Self> {
        if values.iter().any(|v| field.is_zero(v)) {
            return Err(Error::Domain("specialization values must be units".into()));
        }
        Ok(Specialization { field, values })
    }

    pub fn parse(field: F, s: &[String]) -> Result<Self> {
        let values = s.iter().map(|v| field.parse(v)).collect::<Result<Vec<_>>>()?;
        Self::new(field, values)
    }

    fn check(&self, d: &CellDatum) -> Result<()> {
        if self.values.len() != d.gamma_rank {
            return Err(Error::DatumMismatch(format!(
                "specialization has {} values, Γ has rank {}",
                self.values.len(),
                d.gamma_rank
            )));
        }
        Ok(())
    }

    /// Image of `q^g`.
    pub fn q(&self, g: &GammaElement) -> F::Elem {
        let f = &self.field;
        let mut acc = f.one();
        for (v, e) in self.values.iter().zip(g.exps()) {
            acc = f.mul(&acc, &f.pow(v, e).expect("units"));
        }
        acc
    }

    pub fn eval(&self, c: &Laurent) -> F::Elem {
        let f = &self.field;
        c.eval_with(f.zero(), |g| self.q(&g), |acc, k, m| f.add(&acc, &f.mul(&f.from_int(k), &m)))
    }

    pub fn render(&self) -> Vec<String> {
        self.values.iter().map(|v| self.field.render(v)).collect()
    }
}

/// Point of the torus, coordinates dual to the ω-basis.
#[derive(Clone, Debug)]
pub struct TorusPoint<F: Field> {
    pub coords: Vec<F::Elem>,
}

impl<F: Field> TorusPoint<F> {
    pub fn new(f: &F, coords: Vec<F::Elem>) -> Result<Self> {
        if coords.iter().any(|c| f.is_zero(c)) {
            return Err(Error::Domain("torus coordinates must be nonzero".into()));
        }
        Ok(TorusPoint { coords })
    }

    pub fn parse(f: &F, s: &[String]) -> Result<Self> {
        let coords = s.iter().map(|v| f.parse(v)).collect::<Result<Vec<_>>>()?;
        Self::new(f, coords)
    }

    pub fn render(&self, f: &F) -> Vec<String> {
        self.coords.iter().map(|v| f.render(v)).collect()
    }
}

/// `χ_x(t)` through the weights of the center datum.
pub fn character<F: Field>(d: &CellDatum, f: &F, x: &[i64], t: &TorusPoint<F>) -> Result<F::Elem> {
    if t.coords.len() != d.rank {
        return Err(Error::DatumMismatch(format!("torus point has {} coordinates, expected {}", t.coords.len(), d.rank)));
    }
    let mut acc = f.zero();
    for (w, m) in d.center_weights(x)? {
        let mut term = f.from_int(&Int::from(m));
        for (ti, e) in t.coords.iter().zip(&w) {
            term = f.mul(&term, &f.pow(ti, *e).expect("nonzero coordinates"));
        }
        acc = f.add(&acc, &term);
    }
    Ok(acc)
}

/// `λ_t` of a center element after specializing its coefficients.
pub fn eval_center<F: Field>(d: &CellDatum, spec: &Specialization<F>, t: &TorusPoint<F>, a: &Rep<Laurent>) -> Result<F::Elem> {
    Evaluator::new(d, spec, t).center(a)
}

/// `λ_t` at one point with memoized characters.
pub struct Evaluator<'s, F: Field> {
    d: &'s CellDatum,
    spec: &'s Specialization<F>,
    t: &'s TorusPoint<F>,
    chars: FxHashMap<Weight, F::Elem>,
}

impl<'s, F: Field> Evaluator<'s, F> {
    pub fn new(d: &'s CellDatum, spec: &'s Specialization<F>, t: &'s TorusPoint<F>) -> Self {
        Evaluator { d, spec, t, chars: FxHashMap::default() }
    }

    pub fn character(&mut self, x: &Weight) -> Result<F::Elem> {
        if let Some(v) = self.chars.get(x) {
            return Ok(v.clone());
        }
        let v = character(self.d, &self.spec.field, x, self.t)?;
        self.chars.insert(x.clone(), v.clone());
        Ok(v)
    }

    pub fn center(&mut self, a: &Rep<Laurent>) -> Result<F::Elem> {
        let f = &self.spec.field;
        let mut acc = f.zero();
        for (x, c) in a {
            let v = self.spec.eval(c);
            if f.is_zero(&v) {
                continue;
            }
            let ch = self.character(x)?;
            acc = f.add(&acc, &f.mul(&v, &ch));
        }
        Ok(acc)
    }
}

/// Subsets of the finite generators `1..=r`, encoded as bit masks.
pub fn subset_of(mask: u32, r: usize) -> Vec<usize> {
    (1..=r).filter(|i| mask >> (i - 1) & 1 == 1).collect()
}

pub fn subset_label(s: &[usize]) -> String {
    let v: Vec<String> = s.iter().map(|i| i.to_string()).collect();
    format!("{{{}}}", v.join(","))
}

/// `ζ_I = q_{w_I}^{-1} Σ_{y ∈ W_I} q_y^2`, specialized.
pub fn zeta<F: Field>(d: &CellDatum, subset: &[usize], spec: &Specialization<F>) -> F::Elem {
    spec.eval(&Hecke::new(d).parabolic_poincare(subset))
}

/// `{I | ζ_{I'} ≠ 0 and ζ_{I' ∪ {i}} = 0 for all i ∈ I}`, as masks in increasing order.
pub fn delta_set<F: Field>(d: &CellDatum, spec: &Specialization<F>) -> Vec<u32> {
    let r = d.rank;
    let full = (1u32 << r) - 1;
    let f = &spec.field;
    let nz: Vec<bool> = (0..=full).map(|m| !f.is_zero(&zeta(d, &subset_of(m, r), spec))).collect();
    let out: Vec<u32> = (0..=full)
        .filter(|&i| {
            let ip = full & !i;
            nz[ip as usize] && (1..=r).filter(|k| i >> (k - 1) & 1 == 1).all(|k| !nz[(ip | 1 << (k - 1)) as usize])
        })
        .collect();
    debug_assert!(out.iter().all(|&a| out.iter().all(|&b| a == b || a & b != a)));
    out
}

/// Determinant of a square matrix over the center by cofactor expansion
/// along rows, memoized on the set of remaining columns.
pub fn rep_det(d: &CellDatum, m: &[Vec<Rep<Laurent>>]) -> Result<Rep<Laurent>> {
    let n = m.len();
    if n > 20 {
        return Err(Error::Resource(format!("symbolic determinant of size {n}")));
    }
    let one: Rep<Laurent> = [(Weight::from_elem(0, d.rank), Laurent::one(d.gamma_rank))].into_iter().collect();
    // memo[S] = det of rows n-|S|.. against the columns in S.
    let mut memo: Vec<Option<Rep<Laurent>>> = vec![None; 1 << n];
    memo[0] = Some(one);
    let mut masks: Vec<u32> = (1..1u32 << n).collect();
    masks.sort_by_key(|s| s.count_ones());
    for s in masks {
        let row = n - s.count_ones() as usize;
        let mut acc = Rep::new();
        let mut pos = 0;
        for j in 0..n {
            if s >> j & 1 == 0 {
                continue;
            }
            let sign = if pos % 2 == 0 { 1 } else { -1 };
            pos += 1;
            let e = &m[row][j];
            if e.is_empty() {
                continue;
            }
            let sub = memo[(s & !(1 << j)) as usize].as_ref().unwrap();
            if sub.is_empty() {
                continue;
            }
            for (x, c) in rep_mul(d, e, sub)? {
                rep_add(&mut acc, &x, &c.times(sign));
            }
        }
        memo[s as usize] = Some(acc);
    }
    Ok(memo[(1 << n) - 1].take().unwrap())
}

/// `S_x ↦ S_{x*}` with `x* = −w₀(x)`.
pub fn rep_star(d: &CellDatum, a: &Rep<Laurent>) -> Rep<Laurent> {
    let w0 = d.weyl.w0;
    a.iter().map(|(x, c)| (d.weyl.act(w0, x).iter().map(|v| -v).collect::<Weight>(), c.clone())).collect()
}

/// Classification data of the lowest cell over one KL table.
pub struct Spectra<'a> {
    pub cx: &'a CellContext<'a>,
    /// `m[w₁][w₂] = Σ_x h_{w₀w₁⁻¹, w₂w₀, w₀p_x} S_x`, indices into the box.
    pub m: Vec<Vec<Rep<Laurent>>>,
    /// Box index of the identity.
    pub e: usize,
    /// For each mask `I`: the box index `w` with `x_I w_{I'} = w w₀`.
    pub alpha_index: BTreeMap<u32, usize>,
}

impl<'a> Spectra<'a> {
    /// Table radius needed for every product in the `m`-matrix.
    pub fn required_radius(d: &CellDatum) -> u32 {
        let top = d.box_elements().iter().map(|w| d.length(w)).max().unwrap_or(0);
        2 * (d.w0_length() + top)
    }

    pub fn new(cx: &'a CellContext<'a>) -> Result<Spectra<'a>> {
        let t = cx.table;
        let d = &*t.datum;
        let need = Self::required_radius(d);
        if need > t.radius {
            return Err(Error::Truncation { what: "m-matrix".into(), needed: need as usize, have: t.radius as usize });
        }
        let bx = d.box_elements();
        let e = d.box_index(&d.identity()).expect("identity lies in the box");
        let lefts: Vec<u32> = bx
            .iter()
            .map(|w| t.require_index(&d.mul(&d.w0, &d.inverse(w)), "m-matrix row factor"))
            .collect::<Result<_>>()?;
        let rights: Vec<u32> =
            bx.iter().map(|w| t.require_index(&d.mul(w, &d.w0), "m-matrix column factor")).collect::<Result<_>>()?;
        cx.precompute(&lefts, &rights)?;
        let m = lefts
            .par_iter()
            .map(|&a| rights.iter().map(|&b| center_part(cx, a, b)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let mut alpha_index = BTreeMap::new();
        if d.mode == Mode::Extended {
            let r = d.rank;
            for mask in 0u32..1 << r {
                let i = subset_of(mask, r);
                let ip = subset_of(((1u32 << r) - 1) & !mask, r);
                let mut xi = vec![0i64; r];
                for &k in &i {
                    xi[k - 1] = 1;
                }
                let y = d.mul(&d.translation(&xi), &d.finite(d.parabolic_longest(&ip)));
                let w = d.mul(&y, &d.w0);
                let wi = d.box_index(&w).ok_or_else(|| {
                    Error::Verification(format!("x_I w_I' w₀ is outside the box for I = {}", subset_label(&i)))
                })?;
                alpha_index.insert(mask, wi);
            }
        }
        Ok(Spectra { cx, m, e, alpha_index })
    }

    pub fn datum(&self) -> &CellDatum {
        &self.cx.table.datum
    }

    pub fn size(&self) -> usize {
        self.m.len()
    }

    /// `α_I = Σ_x h_{w₀, x_I w_{I'}, w₀p_x} S_x`.
    pub fn alpha(&self, mask: u32) -> Result<&Rep<Laurent>> {
        let w = self
            .alpha_index
            .get(&mask)
            .ok_or_else(|| Error::Domain("α_I is defined for the extended group with I ⊆ I₀".into()))?;
        Ok(&self.m[self.e][*w])
    }

    pub fn det_element(&self) -> Result<Rep<Laurent>> {
        rep_det(self.datum(), &self.m)
    }

    pub fn eval_matrix<F: Field>(&self, spec: &Specialization<F>, t: &TorusPoint<F>) -> Result<Vec<Vec<F::Elem>>> {
        spec.check(self.datum())?;
        let mut ev = Evaluator::new(self.datum(), spec, t);
        self.eval_matrix_with(&mut ev)
    }

    fn eval_matrix_with<F: Field>(&self, ev: &mut Evaluator<'_, F>) -> Result<Vec<Vec<F::Elem>>> {
        self.m.iter().map(|row| row.iter().map(|a| ev.center(a)).collect()).collect()
    }

    /// `λ_t(α_I) ≠ 0` for some `I ∈ Δ_k`.
    pub fn attached<F: Field>(&self, spec: &Specialization<F>, t: &TorusPoint<F>) -> Result<bool> {
        spec.check(self.datum())?;
        let mut ev = Evaluator::new(self.datum(), spec, t);
        for i in delta_set(self.datum(), spec) {
            if !spec.field.is_zero(&ev.center(self.alpha(i)?)?) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn dim_rho<F: Field>(&self, spec: &Specialization<F>, t: &TorusPoint<F>) -> Result<usize> {
        let mut a = self.eval_matrix(spec, t)?;
        Ok(linalg::rank(&spec.field, &mut a))
    }

    /// Full report at one point; `symbolic_det` enables the second determinant route.
    pub fn point<F: Field>(
        &self,
        spec: &Specialization<F>,
        t: &TorusPoint<F>,
        symbolic_det: Option<&Rep<Laurent>>,
    ) -> Result<PointReport> {
        let d = self.datum();
        let f = &spec.field;
        spec.check(d)?;
        let mut ev = Evaluator::new(d, spec, t);
        let mat = self.eval_matrix_with(&mut ev)?;
        let row_criterion = mat[self.e].iter().any(|v| !f.is_zero(v));
        let det = linalg::det(f, mat.clone());
        let mut work = mat;
        let dim = linalg::rank(f, &mut work);
        let det_routes_agree = match symbolic_det {
            Some(s) => ev.center(s)? == det,
            None => true,
        };
        let (delta_k, attached, alpha) = if d.mode == Mode::Extended {
            let dk = delta_set(d, spec);
            let mut alpha = BTreeMap::new();
            for (&mask, _) in &self.alpha_index {
                let v = ev.center(self.alpha(mask)?)?;
                alpha.insert(subset_label(&subset_of(mask, d.rank)), f.render(&v));
            }
            let mut att = false;
            for &i in &dk {
                att |= !f.is_zero(&ev.center(self.alpha(i)?)?);
            }
            (Some(dk.iter().map(|&m| subset_label(&subset_of(m, d.rank))).collect()), Some(att), Some(alpha))
        } else {
            (None, None, None)
        };
        let n = self.size();
        let iso = !f.is_zero(&det);
        let consistent = det_routes_agree
            && attached.is_none_or(|a| a == (dim > 0))
            && row_criterion == (dim > 0)
            && iso == (dim == n);
        Ok(PointReport {
            field: f.name(),
            q: spec.render(),
            torus: t.render(f),
            alpha,
            delta_k,
            attached,
            row_criterion,
            dim,
            box_size: n,
            det: f.render(&det),
            phi_iso: iso,
            det_routes_agree,
            consistent,
        })
    }
}

/// `Σ_x h_{a,b,w₀p_x} S_x`.
fn center_part(cx: &CellContext, a: u32, b: u32) -> Result<Rep<Laurent>> {
    let t = cx.table;
    let d = &*t.datum;
    let e = d.box_index(&d.identity()).unwrap();
    let mut out = Rep::new();
    for (z, h) in cx.structure(a, b)?.iter() {
        if let Some(f) = cx.factor(*z) {
            if f.w1 == e && f.w2 == e {
                rep_add(&mut out, &f.x, h);
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct PointReport {
    pub field: String,
    pub q: Vec<String>,
    pub torus: Vec<String>,
    /// `λ_t(α_I)` for every `I ⊆ I₀`.
    pub alpha: Option<BTreeMap<String, String>>,
    pub delta_k: Option<Vec<String>>,
    pub attached: Option<bool>,
    /// `C_{w₀}` acts nonzero: the identity row of the evaluated matrix is nonzero.
    pub row_criterion: bool,
    pub dim: usize,
    pub box_size: usize,
    pub det: String,
    pub phi_iso: bool,
    pub det_routes_agree: bool,
    /// attached ⟺ dim > 0 ⟺ row criterion, and det ≠ 0 ⟺ dim = |W₀|.
    pub consistent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GridReport {
    pub points: Vec<PointReport>,
    pub inconsistent: usize,
    pub rank_drops: usize,
    pub not_attached: usize,
}

/// Every pair from `specs × tori`, evaluated in parallel.
pub fn grid_scan<F: Field>(
    sp: &Spectra,
    specs: &[Specialization<F>],
    tori: &[TorusPoint<F>],
    symbolic_det: Option<&Rep<Laurent>>,
) -> Result<GridReport> {
    let jobs: Vec<(usize, usize)> = (0..specs.len()).flat_map(|i| (0..tori.len()).map(move |j| (i, j))).collect();
    let points = jobs
        .par_iter()
        .map(|&(i, j)| sp.point(&specs[i], &tori[j], symbolic_det))
        .collect::<Result<Vec<_>>>()?;
    let inconsistent = points.iter().filter(|p| !p.consistent).count();
    let rank_drops = points.iter().filter(|p| p.dim < p.box_size).count();
    let not_attached = points.iter().filter(|p| p.dim == 0).count();
    Ok(GridReport { points, inconsistent, rank_drops, not_attached })
}
