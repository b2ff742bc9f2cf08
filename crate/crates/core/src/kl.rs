//! Kazhdan–Lusztig basis on a ball of the affine Weyl group, the μ-table and a
//! product engine working directly in the C-basis.
//!
//! `C_w = Σ_y p̃_{y,w} T̃_y` is the unique bar-invariant element with `p̃_{w,w} = 1`
//! and `p̃_{y,w} ∈ ℤ[Γ_{<0}]` otherwise. All elements of length ≤ radius are
//! tabulated; elements are addressed by their index in the ball, which is
//! sorted by length, so the support of `C_w` lies at indices `<= w`.

use std::sync::Arc;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::affine::{AffineElement, CellDatum};
use crate::error::{Error, Result};
use crate::gamma::{GammaElement, Laurent};
use crate::hecke::HeckeElement;

pub const NONE: u32 = u32::MAX;

/// Element of the Hecke algebra in the C-basis, keyed by ball index.
pub type CVec = FxHashMap<u32, Laurent>;

type Sparse = Vec<(u32, Laurent)>;

pub struct KlTable {
    pub datum: Arc<CellDatum>,
    pub radius: u32,
    pub elems: Vec<AffineElement>,
    index: FxHashMap<AffineElement, u32>,
    pub len: Vec<u32>,
    pub wlen: Vec<GammaElement>,
    level_start: Vec<usize>,
    left: Vec<Vec<u32>>,
    right: Vec<Vec<u32>>,
    omega_left: Vec<Vec<u32>>,
    inv: Vec<u32>,
    basis: Vec<Sparse>,
    mu: Vec<Vec<Option<Sparse>>>,
    q: Vec<Laurent>,
    qinv: Vec<Laurent>,
    qsum: Vec<Laurent>,
}

fn add_into(x: &mut [Laurent], i: u32, c: &Laurent) {
    x[i as usize].add_assign(c);
}

impl KlTable {
    pub fn new(datum: Arc<CellDatum>, radius: u32) -> Result<KlTable> {
        if radius > 200 {
            return Err(Error::Resource(format!("radius {radius} is too large")));
        }
        let maxw = datum.weights.iter().flat_map(|g| g.exps()).map(i64::abs).max().unwrap_or(1);
        let bound = crate::gamma::max_coord(datum.gamma_rank);
        if maxw * (4 * radius as i64 + 8) > bound {
            return Err(Error::Resource("weights times radius exceed the exponent range".into()));
        }
        let elems = datum.enumerate_ball(radius);
        let n = elems.len();
        let index: FxHashMap<AffineElement, u32> = elems.iter().enumerate().map(|(i, w)| (*w, i as u32)).collect();
        let len: Vec<u32> = elems.iter().map(|w| datum.length(w)).collect();
        let mut level_start = vec![0usize; radius as usize + 2];
        for l in 0..=radius as usize + 1 {
            level_start[l] = len.iter().position(|&x| x as usize >= l).unwrap_or(n);
        }
        let look = |w: AffineElement| index.get(&w).copied().unwrap_or(NONE);
        let left: Vec<Vec<u32>> =
            datum.gens.iter().map(|g| elems.par_iter().map(|w| look(datum.mul(g, w))).collect()).collect();
        let right: Vec<Vec<u32>> =
            datum.gens.iter().map(|g| elems.par_iter().map(|w| look(datum.mul(w, g))).collect()).collect();
        let omega_left: Vec<Vec<u32>> =
            datum.omega.iter().map(|p| elems.iter().map(|w| look(datum.mul(p, w))).collect()).collect();
        let inv: Vec<u32> = elems.iter().map(|w| look(datum.inverse(w))).collect();
        let mut wlen = vec![GammaElement::zero(datum.gamma_rank); n];
        for i in 0..n {
            if len[i] > 0 {
                let s = (0..datum.num_gens()).find(|&s| left[s][i] != NONE && len[left[s][i] as usize] < len[i]).unwrap();
                wlen[i] = wlen[left[s][i] as usize].add(&datum.weights[s]);
            }
        }
        let q: Vec<Laurent> = datum.weights.iter().map(|g| Laurent::q(*g)).collect();
        let qinv: Vec<Laurent> = datum.weights.iter().map(|g| Laurent::q(g.neg())).collect();
        let qsum: Vec<Laurent> = q
            .iter()
            .zip(&qinv)
            .map(|(a, b)| {
                let mut s = a.clone();
                s.add_assign(b);
                s
            })
            .collect();
        let ns = datum.num_gens();
        let mut t = KlTable {
            datum,
            radius,
            elems,
            index,
            len,
            wlen,
            level_start,
            left,
            right,
            omega_left,
            inv,
            basis: vec![Vec::new(); n],
            mu: vec![vec![None; ns]; n],
            q,
            qinv,
            qsum,
        };
        t.build();
        Ok(t)
    }

    fn one(&self) -> Laurent {
        Laurent::one(self.datum.gamma_rank)
    }

    fn build(&mut self) {
        let zero_lv = self.level_start[0]..self.level_start[1];
        for i in zero_lv {
            self.basis[i] = vec![(i as u32, self.one())];
        }
        for n in 1..=self.radius as usize {
            let lv = self.level_start[n]..self.level_start[n + 1];
            let top = self.level_start[n + 1];
            let results: Vec<(Sparse, usize, u32, Sparse)> = lv
                .clone()
                .into_par_iter()
                .map_init(
                    || vec![Laurent::zero(); top],
                    |scratch, w| {
                        let s = self.first_left_descent(w as u32);
                        let v = self.left[s][w];
                        let (cw, mu) = self.compute_c(scratch, w as u32, s, v);
                        (cw, s, v, mu)
                    },
                )
                .collect();
            for (w, (cw, s, v, mu)) in lv.clone().zip(results) {
                self.basis[w] = cw;
                self.mu[v as usize][s] = Some(mu);
            }
            // Remaining pairs (s, v) with l(sv) = n.
            let prev = self.level_start[n - 1]..self.level_start[n];
            let ns = self.datum.num_gens();
            let extra: Vec<(usize, usize, Sparse)> = prev
                .into_par_iter()
                .map_init(
                    || vec![Laurent::zero(); top],
                    |scratch, v| {
                        let mut out = Vec::new();
                        for s in 0..ns {
                            let sv = self.left[s][v];
                            if sv != NONE && self.len[sv as usize] as usize == n && self.mu[v][s].is_none() {
                                out.push((v, s, self.compute_mu(scratch, s, v as u32)));
                            }
                        }
                        out
                    },
                )
                .flatten()
                .collect();
            for (v, s, mu) in extra {
                self.mu[v][s] = Some(mu);
            }
        }
    }

    fn first_left_descent(&self, w: u32) -> usize {
        let lw = self.len[w as usize];
        (0..self.datum.num_gens())
            .find(|&s| {
                let sw = self.left[s][w as usize];
                sw != NONE && self.len[sw as usize] < lw
            })
            .expect("no left descent")
    }

    /// Accumulates `C_s C_v` in the T̃-basis into `x`.
    fn cs_cv(&self, x: &mut [Laurent], s: usize, v: u32) {
        for (y, p) in &self.basis[v as usize] {
            let sy = self.left[s][*y as usize];
            add_into(x, sy, p);
            if self.len[sy as usize] > self.len[*y as usize] {
                add_into(x, *y, &p.mul(&self.qinv[s]));
            } else {
                add_into(x, *y, &p.mul(&self.q[s]));
            }
        }
    }

    fn sub_c(&self, x: &mut [Laurent], z: u32, c: &Laurent) {
        for (y, p) in &self.basis[z as usize] {
            x[*y as usize].sub_assign(&p.mul(c));
        }
    }

    fn compute_c(&self, x: &mut [Laurent], w: u32, s: usize, v: u32) -> (Sparse, Sparse) {
        self.cs_cv(x, s, v);
        assert!(x[w as usize].is_one(), "leading coefficient of C_s C_v is not 1");
        let zero = GammaElement::zero(self.datum.gamma_rank);
        let mut mu = Vec::new();
        let lw = self.len[w as usize];
        for z in (0..w as usize).rev() {
            if x[z].is_zero() {
                continue;
            }
            if x[z].deg().finite().is_some_and(|d| d >= zero) {
                assert!(self.len[z] < lw, "non-triangular term at equal length");
                let m = x[z].bar_symmetric_top();
                self.sub_c(x, z as u32, &m);
                mu.push((z as u32, m));
            }
        }
        let mut cw = Vec::new();
        for (y, c) in x.iter_mut().enumerate().take(w as usize + 1) {
            if !c.is_zero() {
                cw.push((y as u32, std::mem::take(c)));
            }
        }
        for c in x.iter_mut() {
            if !c.is_zero() {
                *c = Laurent::zero();
            }
        }
        mu.reverse();
        (cw, mu)
    }

    /// μ-coefficients of `C_s C_v − C_{sv}` by peeling the C-expansion.
    fn compute_mu(&self, x: &mut [Laurent], s: usize, v: u32) -> Sparse {
        self.cs_cv(x, s, v);
        let sv = self.left[s][v as usize];
        self.sub_c(x, sv, &self.one());
        let mut mu = Vec::new();
        for z in (0..x.len()).rev() {
            if x[z].is_zero() {
                continue;
            }
            let m = std::mem::take(&mut x[z]);
            debug_assert!(m.is_bar_invariant(), "μ is not bar invariant");
            self.sub_c(x, z as u32, &m);
            x[z] = Laurent::zero();
            mu.push((z as u32, m));
        }
        mu.reverse();
        mu
    }

    pub fn size(&self) -> usize {
        self.elems.len()
    }

    pub fn index_of(&self, w: &AffineElement) -> Option<u32> {
        self.index.get(w).copied()
    }

    pub fn require_index(&self, w: &AffineElement, what: &str) -> Result<u32> {
        self.index_of(w).ok_or_else(|| Error::Truncation {
            what: what.to_string(),
            needed: self.datum.length(w) as usize,
            have: self.radius as usize,
        })
    }

    pub fn elem(&self, i: u32) -> AffineElement {
        self.elems[i as usize]
    }

    pub fn length(&self, i: u32) -> u32 {
        self.len[i as usize]
    }

    /// Indices of elements of length `<= n`.
    pub fn ball_indices(&self, n: u32) -> std::ops::Range<u32> {
        0..self.level_start[(n.min(self.radius) + 1) as usize] as u32
    }

    pub fn level(&self, n: u32) -> std::ops::Range<u32> {
        if n > self.radius {
            return 0..0;
        }
        self.level_start[n as usize] as u32..self.level_start[n as usize + 1] as u32
    }

    pub fn left_mul_gen(&self, s: usize, i: u32) -> u32 {
        self.left[s][i as usize]
    }

    pub fn right_mul_gen(&self, i: u32, s: usize) -> u32 {
        self.right[s][i as usize]
    }

    pub fn inverse_index(&self, i: u32) -> u32 {
        self.inv[i as usize]
    }

    pub fn q_gen(&self, s: usize) -> &Laurent {
        &self.q[s]
    }

    /// `p̃_{y,w}` for all `y` in the support of `C_w`, ascending by index.
    pub fn kl_coeffs(&self, w: u32) -> &[(u32, Laurent)] {
        &self.basis[w as usize]
    }

    pub fn kl_coeff(&self, y: u32, w: u32) -> Laurent {
        let b = &self.basis[w as usize];
        match b.binary_search_by_key(&y, |(k, _)| *k) {
            Ok(i) => b[i].1.clone(),
            Err(_) => Laurent::zero(),
        }
    }

    /// `μ^s_{z,v}` with `C_s C_v = C_{sv} + Σ_z μ^s_{z,v} C_z`, when `sv > v`.
    pub fn mu(&self, v: u32, s: usize) -> Option<&[(u32, Laurent)]> {
        self.mu[v as usize][s].as_deref()
    }

    /// `C_w` in the T̃-basis.
    pub fn kl_element(&self, w: &AffineElement) -> Result<HeckeElement> {
        let i = self.require_index(w, "KL element")?;
        Ok(self.c_to_t(&std::iter::once((i, self.one())).collect()))
    }

    pub fn c_to_t(&self, c: &CVec) -> HeckeElement {
        let mut h = HeckeElement::zero();
        for (z, a) in c {
            for (y, p) in &self.basis[*z as usize] {
                h.add_term(self.elems[*y as usize], &p.mul(a));
            }
        }
        h
    }

    /// C-expansion of an element given in the T̃-basis.
    pub fn t_to_c(&self, h: &HeckeElement) -> Result<CVec> {
        let mut x = vec![Laurent::zero(); self.size()];
        for (w, c) in &h.terms {
            if c.is_zero() {
                continue;
            }
            let i = self.require_index(w, "C-basis expansion")?;
            x[i as usize].add_assign(c);
        }
        let mut out = CVec::default();
        for z in (0..x.len()).rev() {
            if x[z].is_zero() {
                continue;
            }
            let m = std::mem::take(&mut x[z]);
            self.sub_c(&mut x, z as u32, &m);
            x[z] = Laurent::zero();
            out.insert(z as u32, m);
        }
        Ok(out)
    }

    fn truncation(&self, what: &str, i: u32) -> Error {
        Error::Truncation { what: what.to_string(), needed: self.len[i as usize] as usize + 1, have: self.radius as usize }
    }

    /// `C_s · v`.
    pub fn left_c_gen(&self, s: usize, v: &CVec) -> Result<CVec> {
        let mut out = CVec::default();
        out.reserve(v.len() * 2);
        for (w, a) in v {
            let sw = self.left[s][*w as usize];
            if sw != NONE && self.len[sw as usize] < self.len[*w as usize] {
                out.entry(*w).or_default().add_assign(&a.mul(&self.qsum[s]));
                continue;
            }
            if sw == NONE {
                return Err(self.truncation("product", *w));
            }
            out.entry(sw).or_default().add_assign(a);
            for (z, m) in self.mu[*w as usize][s].as_ref().ok_or_else(|| self.truncation("product", *w))? {
                out.entry(*z).or_default().add_mul_assign(m, a);
            }
        }
        out.retain(|_, c| !c.is_zero());
        Ok(out)
    }

    /// `T̃_π · v` for the `k`-th length-zero element.
    pub fn left_c_omega(&self, k: usize, v: &CVec) -> Result<CVec> {
        let mut out = CVec::default();
        for (w, a) in v {
            let pw = self.omega_left[k][*w as usize];
            if pw == NONE {
                return Err(self.truncation("product", *w));
            }
            out.insert(pw, a.clone());
        }
        Ok(out)
    }

    pub fn engine(&self, right: CVec) -> ProductEngine<'_> {
        ProductEngine { table: self, right: Arc::new(right), memo: FxHashMap::default() }
    }

    pub fn unit_c(&self, i: u32) -> CVec {
        std::iter::once((i, self.one())).collect()
    }

    /// `C_x C_y` in the C-basis; the coefficients are `h_{x,y,z}`.
    pub fn structure(&self, x: u32, y: u32) -> Result<CVec> {
        let mut e = self.engine(self.unit_c(y));
        Ok((*e.left_c(x)?).clone())
    }

    pub fn h(&self, x: u32, y: u32, z: u32) -> Result<Laurent> {
        Ok(self.structure(x, y)?.get(&z).cloned().unwrap_or_default())
    }

    pub fn multiply(&self, a: &CVec, b: &CVec) -> Result<CVec> {
        let mut e = self.engine(b.clone());
        let mut out = CVec::default();
        for (x, c) in a {
            for (z, h) in e.left_c(*x)?.iter() {
                out.entry(*z).or_default().add_mul_assign(h, c);
            }
        }
        out.retain(|_, c| !c.is_zero());
        Ok(out)
    }

    /// Independent bar(T̃_y) for every y in the ball, built from
    /// `bar(T̃_{sy}) = T̃_s^{-1} bar(T̃_y)`.
    fn bar_t_table(&self) -> Vec<Sparse> {
        let n = self.size();
        let mut out: Vec<Sparse> = vec![Vec::new(); n];
        let xi: Vec<Laurent> = self
            .q
            .iter()
            .zip(&self.qinv)
            .map(|(a, b)| {
                let mut x = a.clone();
                x.sub_assign(b);
                x
            })
            .collect();
        for i in 0..n {
            if self.len[i] == 0 {
                out[i] = vec![(i as u32, self.one())];
                continue;
            }
            let s = self.first_left_descent(i as u32);
            let v = self.left[s][i];
            let mut acc: FxHashMap<u32, Laurent> = FxHashMap::default();
            for (y, c) in &out[v as usize] {
                // T̃_s^{-1} T̃_y = T̃_{sy} + (ξ if sy<y) T̃_y − ξ T̃_y.
                let sy = self.left[s][*y as usize];
                acc.entry(sy).or_default().add_assign(c);
                if self.len[sy as usize] > self.len[*y as usize] {
                    acc.entry(*y).or_default().sub_assign(&c.mul(&xi[s]));
                }
            }
            let mut v: Sparse = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
            v.sort_by_key(|(k, _)| *k);
            out[i] = v;
        }
        out
    }

    /// Checks bar invariance, normalization, Γ<0 triangularity and Bruhat
    /// support of every tabulated `C_w`. Returns the first failing element.
    pub fn verify_defining_conditions(&self) -> std::result::Result<usize, (AffineElement, String)> {
        let bars = self.bar_t_table();
        let zero = GammaElement::zero(self.datum.gamma_rank);
        let fails: Vec<(u32, String)> = (0..self.size() as u32)
            .into_par_iter()
            .filter_map(|w| {
                let b = &self.basis[w as usize];
                let mut acc: FxHashMap<u32, Laurent> = FxHashMap::default();
                for (y, p) in b {
                    if *y == w {
                        if !p.is_one() {
                            return Some((w, "leading coefficient is not 1".into()));
                        }
                    } else {
                        if !p.deg().lt(&zero) {
                            return Some((w, format!("coefficient at {} has degree >= 0", y)));
                        }
                        if !self.datum.bruhat_leq(&self.elems[*y as usize], &self.elems[w as usize]) {
                            return Some((w, "support outside the Bruhat interval".into()));
                        }
                    }
                    let pb = p.bar();
                    for (u, c) in &bars[*y as usize] {
                        acc.entry(*u).or_default().add_mul_assign(&pb, c);
                    }
                }
                acc.retain(|_, c| !c.is_zero());
                let same = acc.len() == b.len() && b.iter().all(|(y, p)| acc.get(y) == Some(p));
                if same {
                    None
                } else {
                    Some((w, "not bar invariant".into()))
                }
            })
            .collect();
        match fails.into_iter().min_by_key(|(w, _)| *w) {
            None => Ok(self.size()),
            Some((w, m)) => Err((self.elems[w as usize], m)),
        }
    }
}

/// Computes `C_x · Y` for a fixed right factor `Y`, memoizing over `x`.
pub struct ProductEngine<'a> {
    table: &'a KlTable,
    right: Arc<CVec>,
    memo: FxHashMap<u32, Arc<CVec>>,
}

impl ProductEngine<'_> {
    pub fn left_c(&mut self, x: u32) -> Result<Arc<CVec>> {
        if let Some(v) = self.memo.get(&x) {
            return Ok(v.clone());
        }
        let t = self.table;
        let out = if t.len[x as usize] == 0 {
            let k = t.datum.omega.iter().position(|p| *p == t.elems[x as usize]).unwrap();
            t.left_c_omega(k, &self.right)?
        } else {
            // C_x = C_s C_{sx} − Σ μ^s_{z,sx} C_z.
            let s = t.first_left_descent(x);
            let v = t.left[s][x as usize];
            let base = self.left_c(v)?;
            let mut acc = t.left_c_gen(s, &base)?;
            let mus = t.mu[v as usize][s].clone().expect("μ-table entry missing inside the ball");
            for (z, m) in &mus {
                let mz = self.left_c(*z)?;
                for (k, c) in mz.iter() {
                    acc.entry(*k).or_default().sub_assign(&c.mul(m));
                }
            }
            acc.retain(|_, c| !c.is_zero());
            acc
        };
        let out = Arc::new(out);
        self.memo.insert(x, out.clone());
        Ok(out)
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }
}
