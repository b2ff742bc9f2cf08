//! Extended affine Weyl groups `W = P ⋊ W₀` and the non-extended `W′ = Q ⋊ W₀`.
//!
//! Elements are pairs `p_x u` acting on `V` by `v ↦ u(v) + x`. Hyperplanes are
//! `<v, α^∨> = n` and the fundamental alcove is `A₀ = {0 < <v, α^∨> < 1}`. The
//! affine generator is `s₀ = p_φ s_φ` with `φ^∨` the highest coroot. The
//! translation lattice is the root lattice of `R`, so a user-facing type `X̃`
//! is realized with `R` the dual of `X`.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use rustc_hash::FxHashMap;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::gamma::GammaElement;
use crate::root::{CartanType, FinIdx, FiniteWeyl, RootDatum, Weight};

pub const MAX_AFFINE_RANK: usize = 6;
/// Elements with larger translation coordinates are rejected.
pub const MAX_TRANSLATION: i64 = 8000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Extended,
    NonExtended,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Extended => "extended",
            Mode::NonExtended => "non-extended",
        })
    }
}

/// `p_x u` with `x` stored in ω-coordinates; unused trailing coordinates are 0.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineElement {
    pub trans: [i16; MAX_AFFINE_RANK],
    pub fin: FinIdx,
}

impl fmt::Debug for AffineElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{:?}·u{}", &self.trans, self.fin)
    }
}

impl AffineElement {
    pub fn translation(&self, rank: usize) -> Weight {
        self.trans[..rank].iter().map(|&c| c as i64).collect()
    }
}

fn pack(x: &[i64]) -> [i16; MAX_AFFINE_RANK] {
    let mut t = [0i16; MAX_AFFINE_RANK];
    for (i, &c) in x.iter().enumerate() {
        assert!(c.abs() <= MAX_TRANSLATION, "translation coordinate {c} out of range");
        t[i] = c as i16;
    }
    t
}

/// Factorization `z = w₁ w₀ p_x w₂⁻¹` of an element of the lowest cell, with
/// `w₁, w₂` given as indices into the box set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct C0Factor {
    pub w1: usize,
    pub x: Weight,
    pub w2: usize,
}

pub struct CellDatum {
    /// Label of the affine type, e.g. `C2` for C̃₂.
    pub affine_type: CartanType,
    pub root: Arc<RootDatum>,
    /// Datum whose characters give the central elements `S_x`: `root` itself,
    /// or in non-extended mode the type-C datum whose weight lattice is the
    /// translation lattice (coordinates differ by halving the last one).
    pub center: Arc<RootDatum>,
    pub weyl: Arc<FiniteWeyl>,
    pub mode: Mode,
    pub rank: usize,
    /// `s₀, s₁, …, s_r`.
    pub gens: Vec<AffineElement>,
    /// Length-zero elements, identity first.
    pub omega: Vec<AffineElement>,
    omega_class: Vec<Vec<i64>>,
    /// Coxeter matrix on `S`; 0 encodes ∞.
    pub coxeter: Vec<Vec<u32>>,
    pub gamma_rank: usize,
    /// `L(s_i)`.
    pub weights: Vec<GammaElement>,
    pub box_bounds: Vec<i64>,
    pub w0: AffineElement,
    /// Sample point of `A₀` scaled by `p0_den`: all coordinates 1.
    p0_den: i64,
    box_set: Vec<AffineElement>,
    box_index: FxHashMap<AffineElement, usize>,
    bruhat_memo: Mutex<FxHashMap<(AffineElement, AffineElement), bool>>,
}

impl fmt::Debug for CellDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CellDatum({}~, {}, L={:?})", self.affine_type, self.mode, self.weights)
    }
}

fn dual(t: CartanType) -> CartanType {
    match t {
        CartanType::B(n) => CartanType::C(n),
        CartanType::C(n) => CartanType::B(n),
        other => other,
    }
}

impl CellDatum {
    /// Builds the datum; `weights[i]` is `L(s_i)`.
    pub fn new(affine_type: CartanType, mode: Mode, weights: Vec<GammaElement>) -> Result<CellDatum> {
        let root = Arc::new(RootDatum::new(dual(affine_type))?);
        let r = root.rank;
        if r > MAX_AFFINE_RANK {
            return Err(Error::Config(format!("affine rank {r} exceeds {MAX_AFFINE_RANK}")));
        }
        let weyl = root.finite_weyl()?;
        if mode == Mode::NonExtended && !matches!(affine_type, CartanType::C(_)) {
            return Err(Error::Config("non-extended mode is only offered for type C~_r".into()));
        }
        if weights.len() != r + 1 {
            return Err(Error::Config(format!("expected {} generator weights, got {}", r + 1, weights.len())));
        }
        let gamma_rank = weights[0].rank();
        for (i, w) in weights.iter().enumerate() {
            if w.rank() != gamma_rank {
                return Err(Error::Config(format!("weight of s{i} has gamma rank {}, expected {gamma_rank}", w.rank())));
            }
            if w.sign() != Ordering::Greater {
                return Err(Error::Config(format!("weight of s{i} must be positive, got {w:?}")));
            }
        }
        let mut gens = Vec::with_capacity(r + 1);
        let phi = root.highest_short_root();
        let phi_w = root.pos_roots_omega[phi].clone();
        let rho = root.rho();
        let refl_rho: Weight = {
            let k = root.pair_coroot(&rho, phi);
            rho.iter().zip(&phi_w).map(|(a, b)| a - k * b).collect()
        };
        let s_phi = (0..weyl.order() as FinIdx).find(|&u| weyl.act(u, &rho) == refl_rho).unwrap();
        gens.push(AffineElement { trans: pack(&phi_w), fin: s_phi });
        for i in 0..r {
            gens.push(AffineElement { trans: [0; MAX_AFFINE_RANK], fin: weyl.gens[i] });
        }
        let p0_den = root.pos_coroots[phi].iter().sum::<i64>() + 1;
        let box_bounds: Vec<i64> = match mode {
            Mode::Extended => vec![1; r],
            Mode::NonExtended => (0..r)
                .map(|i| {
                    let mut x = vec![0i64; r];
                    (1..=root.cartan_det())
                        .find(|&k| {
                            x[i] = k;
                            root.in_root_lattice(&x)
                        })
                        .unwrap()
                })
                .collect(),
        };
        if mode == Mode::NonExtended && box_bounds.iter().product::<i64>() != root.cartan_det() {
            return Err(Error::Config("box lattice does not match the root lattice".into()));
        }
        let w0 = AffineElement { trans: [0; MAX_AFFINE_RANK], fin: weyl.w0 };
        let center = match mode {
            Mode::Extended => root.clone(),
            Mode::NonExtended => Arc::new(RootDatum::new(CartanType::C(r))?),
        };
        let mut d = CellDatum {
            affine_type,
            root: root.clone(),
            center,
            weyl: weyl.clone(),
            mode,
            rank: r,
            gens,
            omega: Vec::new(),
            omega_class: Vec::new(),
            coxeter: Vec::new(),
            gamma_rank,
            weights,
            box_bounds,
            w0,
            p0_den,
            box_set: Vec::new(),
            box_index: FxHashMap::default(),
            bruhat_memo: Mutex::new(FxHashMap::default()),
        };
        // Ω: one length-zero element per class of P/Q, found among p_x u with
        // x ∈ {0, ω_i}.
        let ident = d.identity();
        d.omega.push(ident);
        d.omega_class.push(root.lattice_class(&vec![0; r]));
        if mode == Mode::Extended {
            for i in 0..r {
                let mut x = vec![0i64; r];
                x[i] = 1;
                let cls = root.lattice_class(&x);
                if d.omega_class.contains(&cls) {
                    continue;
                }
                for u in 0..weyl.order() as FinIdx {
                    let w = AffineElement { trans: pack(&x), fin: u };
                    if d.length(&w) == 0 {
                        d.omega.push(w);
                        d.omega_class.push(cls.clone());
                        break;
                    }
                }
            }
            let mut classes = BTreeSet::new();
            for x in all_small(r, root.cartan_det()) {
                classes.insert(root.lattice_class(&x));
            }
            if classes.len() != d.omega.len() {
                return Err(Error::Config("could not realize every class of P/Q by a length-zero element".into()));
            }
        }
        // Coxeter matrix.
        let n = r + 1;
        let mut cox = vec![vec![1u32; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let st = d.mul(&d.gens[i], &d.gens[j]);
                    let mut p = st;
                    let mut m = 1u32;
                    while p != ident && m <= 12 {
                        p = d.mul(&p, &st);
                        m += 1;
                    }
                    cox[i][j] = if p == ident { m } else { 0 };
                }
            }
        }
        d.coxeter = cox;
        d.check_weights()?;
        // Box set B₀: w with w⁻¹(p₀) in the box.
        let mut bset = Vec::with_capacity(weyl.order());
        for u in 0..weyl.order() as FinIdx {
            let img = weyl.act(u, &vec![1; r]);
            let mut y = vec![0i64; r];
            let mut found = false;
            let ranges: Vec<Vec<i64>> = (0..r)
                .map(|i| {
                    let lo = -div_floor(img[i], p0_den);
                    let n = d.box_bounds[i];
                    // u(p₀)_i + y_i must lie in (0, n).
                    (lo - n..=lo + n)
                        .filter(|&yi| {
                            let v = img[i] + yi * p0_den;
                            v > 0 && v < n * p0_den
                        })
                        .collect()
                })
                .collect();
            for_each_product(&ranges, &mut y, 0, &mut |y| {
                if !found && (mode == Mode::Extended || root.in_root_lattice(y)) {
                    found = true;
                    let winv = AffineElement { trans: pack(y), fin: u };
                    bset.push(d.inverse(&winv));
                }
            });
            if !found {
                return Err(Error::Config("box set construction failed".into()));
            }
        }
        bset.sort_by_key(|w| (d.length(w), *w));
        d.box_index = bset.iter().enumerate().map(|(i, w)| (*w, i)).collect();
        d.box_set = bset;
        Ok(d)
    }

    fn check_weights(&self) -> Result<()> {
        let n = self.rank + 1;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, i: usize) -> usize {
            if p[i] != i {
                let r = find(p, p[i]);
                p[i] = r;
            }
            p[i]
        }
        let join = |p: &mut Vec<usize>, i: usize, j: usize| {
            let (a, b) = (find(p, i), find(p, j));
            if a != b {
                p[a] = b;
            }
        };
        for i in 0..n {
            for j in 0..n {
                if i != j && self.coxeter[i][j] % 2 == 1 {
                    join(&mut parent, i, j);
                }
            }
        }
        for pi in self.omega.iter().skip(1) {
            for i in 0..n {
                let c = self.mul(&self.mul(pi, &self.gens[i]), &self.inverse(pi));
                let j = self.gens.iter().position(|g| *g == c).expect("Ω must permute S");
                if i != j {
                    join(&mut parent, i, j);
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if find(&mut parent, i) == find(&mut parent, j) && self.weights[i] != self.weights[j] {
                    return Err(Error::Config(format!(
                        "weights violate the conjugacy constraint: L(s{i}) = {:?} but L(s{j}) = {:?}, and s{i}, s{j} are conjugate in W",
                        self.weights[i], self.weights[j]
                    )));
                }
            }
        }
        if self.mode == Mode::NonExtended {
            let (a, b) = (self.weights[0], self.weights[self.rank]);
            if a.key() >= b.key() {
                return Err(Error::Config(format!(
                    "non-extended mode requires L(s0) < L(s{}), got {:?} and {:?}",
                    self.rank, a, b
                )));
            }
        }
        Ok(())
    }

    pub fn identity(&self) -> AffineElement {
        AffineElement { trans: [0; MAX_AFFINE_RANK], fin: self.weyl.identity() }
    }

    pub fn translation(&self, x: &[i64]) -> AffineElement {
        AffineElement { trans: pack(x), fin: self.weyl.identity() }
    }

    pub fn finite(&self, u: FinIdx) -> AffineElement {
        AffineElement { trans: [0; MAX_AFFINE_RANK], fin: u }
    }

    pub fn num_gens(&self) -> usize {
        self.rank + 1
    }

    pub fn trans(&self, w: &AffineElement) -> Weight {
        w.translation(self.rank)
    }

    /// `(p_a v)(p_x u) = p_{a + v(x)} (v u)`.
    pub fn mul(&self, a: &AffineElement, b: &AffineElement) -> AffineElement {
        let r = self.rank;
        let vx = self.weyl.act(a.fin, &self.trans(b));
        let t: Weight = (0..r).map(|i| a.trans[i] as i64 + vx[i]).collect();
        AffineElement { trans: pack(&t), fin: self.weyl.mul(a.fin, b.fin) }
    }

    pub fn inverse(&self, a: &AffineElement) -> AffineElement {
        let ui = self.weyl.inv(a.fin);
        let x = self.weyl.act(ui, &self.trans(a));
        let t: Weight = x.iter().map(|c| -c).collect();
        AffineElement { trans: pack(&t), fin: ui }
    }

    /// Number of hyperplanes separating `A₀` and `w(A₀)`.
    pub fn length(&self, w: &AffineElement) -> u32 {
        let x = self.trans(w);
        let mut l = 0i64;
        for j in 0..self.root.num_pos_roots() {
            let k = self.root.pair_coroot(&x, j);
            l += if self.weyl.inverts(w.fin, j) { (k - 1).abs() } else { k.abs() };
        }
        l as u32
    }

    pub fn omega_index(&self, w: &AffineElement) -> usize {
        if self.mode == Mode::NonExtended {
            return 0;
        }
        let cls = self.root.lattice_class(&self.trans(w));
        self.omega_class.iter().position(|c| *c == cls).expect("translation class not realized in Ω")
    }

    /// Checks an externally supplied element belongs to this group.
    pub fn validate(&self, w: &AffineElement) -> Result<()> {
        if w.fin as usize >= self.weyl.order() || w.trans[self.rank..].iter().any(|&c| c != 0) {
            return Err(Error::DatumMismatch(format!("{w:?} is not an element of this group")));
        }
        if self.mode == Mode::NonExtended && !self.root.in_root_lattice(&self.trans(w)) {
            return Err(Error::DatumMismatch("translation is not in the root lattice".into()));
        }
        Ok(())
    }

    pub fn try_mul(&self, a: &AffineElement, b: &AffineElement) -> Result<AffineElement> {
        self.validate(a)?;
        self.validate(b)?;
        Ok(self.mul(a, b))
    }

    pub fn left_descents(&self, w: &AffineElement) -> Vec<usize> {
        let l = self.length(w);
        (0..self.num_gens()).filter(|&i| self.length(&self.mul(&self.gens[i], w)) < l).collect()
    }

    pub fn right_descents(&self, w: &AffineElement) -> Vec<usize> {
        let l = self.length(w);
        (0..self.num_gens()).filter(|&i| self.length(&self.mul(w, &self.gens[i])) < l).collect()
    }

    pub fn first_left_descent(&self, w: &AffineElement) -> Option<usize> {
        let l = self.length(w);
        (0..self.num_gens()).find(|&i| self.length(&self.mul(&self.gens[i], w)) < l)
    }

    /// `(k, word)` with `w = π_k · s_{word[0]} ⋯ s_{word[n-1]}`, peeling the
    /// smallest-index right descent at each step.
    pub fn reduced_word(&self, w: &AffineElement) -> (usize, Vec<usize>) {
        let mut v = *w;
        let mut rev = Vec::new();
        let mut l = self.length(&v);
        while l > 0 {
            let (i, nv) = (0..self.num_gens())
                .map(|i| (i, self.mul(&v, &self.gens[i])))
                .find(|(_, nv)| self.length(nv) < l)
                .expect("positive length element without a descent");
            rev.push(i);
            v = nv;
            l -= 1;
        }
        rev.reverse();
        let k = self.omega.iter().position(|p| *p == v).expect("length-zero element outside Ω");
        (k, rev)
    }

    pub fn from_word(&self, omega: usize, word: &[usize]) -> Result<AffineElement> {
        let mut w = *self.omega.get(omega).ok_or_else(|| Error::Parse(format!("Ω index {omega} out of range")))?;
        for &i in word {
            let g = self.gens.get(i).ok_or_else(|| Error::Parse(format!("generator s{i} out of range")))?;
            w = self.mul(&w, g);
        }
        Ok(w)
    }

    /// `L(w)`, summed over a reduced word.
    pub fn weight_length(&self, w: &AffineElement) -> GammaElement {
        let (_, word) = self.reduced_word(w);
        word.iter().fold(GammaElement::zero(self.gamma_rank), |acc, &i| acc.add(&self.weights[i]))
    }

    /// Bruhat order by the lifting property, memoized.
    pub fn bruhat_leq(&self, y: &AffineElement, w: &AffineElement) -> bool {
        if y == w {
            return true;
        }
        let (ly, lw) = (self.length(y), self.length(w));
        if ly >= lw {
            return false;
        }
        if let Some(&b) = self.bruhat_memo.lock().unwrap().get(&(*y, *w)) {
            return b;
        }
        let s = self.first_left_descent(w).unwrap();
        let sw = self.mul(&self.gens[s], w);
        let sy = self.mul(&self.gens[s], y);
        let res = if self.length(&sy) < ly { self.bruhat_leq(&sy, &sw) } else { self.bruhat_leq(y, &sw) };
        let mut memo = self.bruhat_memo.lock().unwrap();
        if memo.len() > 4_000_000 {
            memo.clear();
        }
        memo.insert((*y, *w), res);
        res
    }

    /// All elements of length at most `n`, sorted by (length, element).
    pub fn enumerate_ball(&self, n: u32) -> Vec<AffineElement> {
        let mut levels: Vec<Vec<AffineElement>> = vec![self.omega.clone()];
        let mut seen: rustc_hash::FxHashSet<AffineElement> = self.omega.iter().copied().collect();
        for len in 1..=n {
            let mut next = Vec::new();
            for w in &levels[len as usize - 1] {
                for g in &self.gens {
                    let v = self.mul(g, w);
                    if !seen.contains(&v) && self.length(&v) == len {
                        seen.insert(v);
                        next.push(v);
                    }
                }
            }
            next.sort();
            levels.push(next);
        }
        let mut out: Vec<AffineElement> = Vec::new();
        for mut lv in levels {
            lv.sort();
            out.extend(lv);
        }
        out
    }

    /// `B₀`, sorted by (length, element).
    pub fn box_elements(&self) -> &[AffineElement] {
        &self.box_set
    }

    pub fn box_index(&self, w: &AffineElement) -> Option<usize> {
        self.box_index.get(w).copied()
    }

    /// `l(w w₀) = l(w) + l(w₀)`.
    pub fn is_in_u0(&self, w: &AffineElement) -> bool {
        self.length(&self.mul(w, &self.w0)) == self.length(w) + self.length(&self.w0)
    }

    /// Geometric form of `U₀`: `w⁻¹(A₀)` lies in the dominant chamber.
    pub fn is_in_u0_geometric(&self, w: &AffineElement) -> bool {
        let p = self.act_sample(&self.inverse(w));
        p.iter().all(|&c| c > 0)
    }

    /// `w(p₀)` scaled by the sample denominator.
    pub fn act_sample(&self, w: &AffineElement) -> Weight {
        let r = self.rank;
        let img = self.weyl.act(w.fin, &vec![1; r]);
        (0..r).map(|i| img[i] + self.p0_den * w.trans[i] as i64).collect()
    }

    fn to_center(&self, x: &[i64]) -> Result<Weight> {
        let mut v: Weight = x.iter().copied().collect();
        if self.mode == Mode::NonExtended {
            let r = self.rank - 1;
            if v[r] % 2 != 0 {
                return Err(Error::Domain(format!("{x:?} is not in the translation lattice")));
            }
            v[r] /= 2;
        }
        Ok(v)
    }

    fn from_center(&self, x: &[i64]) -> Weight {
        let mut v: Weight = x.iter().copied().collect();
        if self.mode == Mode::NonExtended {
            v[self.rank - 1] *= 2;
        }
        v
    }

    /// Weights of `V(x)` with multiplicities `d(x', x)`, in translation coordinates.
    pub fn center_weights(&self, x: &[i64]) -> Result<Vec<(Weight, i64)>> {
        let w = self.center.weights(&self.to_center(x)?)?;
        Ok(w.into_iter().map(|(y, m)| (self.from_center(&y), m)).collect())
    }

    /// `V(x) ⊗ V(y) = Σ m(x, y, z) V(z)`.
    pub fn center_tensor(&self, x: &[i64], y: &[i64]) -> Result<Vec<(Weight, i64)>> {
        let t = self.center.tensor_decomposition(&self.to_center(x)?, &self.to_center(y)?)?;
        Ok(t.iter().map(|(z, m)| (self.from_center(z), *m)).collect())
    }

    pub fn center_multiplicity(&self, x: &[i64], y: &[i64], z: &[i64]) -> Result<i64> {
        self.center.tensor_multiplicity(&self.to_center(x)?, &self.to_center(y)?, &self.to_center(z)?)
    }

    pub fn center_dim(&self, x: &[i64]) -> Result<i64> {
        self.center.dim_irrep(&self.to_center(x)?)
    }

    pub fn is_dominant_lattice(&self, x: &[i64]) -> bool {
        x.iter().all(|&c| c >= 0) && (self.mode == Mode::Extended || self.root.in_root_lattice(x))
    }

    pub fn w0_length(&self) -> u32 {
        self.length(&self.w0)
    }

    /// Factorization of `z` in the lowest two-sided cell.
    pub fn c0_factorize(&self, z: &AffineElement) -> Option<C0Factor> {
        let lz = self.length(z);
        let l0 = self.w0_length();
        if lz < l0 {
            return None;
        }
        let r = self.rank;
        for (i2, w2) in self.box_set.iter().enumerate() {
            // z w₂ w₀ = w₁ p_{x*} with x* = −w₀(x) and w₁⁻¹(p₀) in the box.
            let v = self.mul(&self.mul(z, w2), &self.w0);
            let pt = self.act_sample(&self.inverse(&v));
            let xs: Weight = (0..r).map(|i| self.box_bounds[i] * div_floor(pt[i], self.box_bounds[i] * self.p0_den)).collect();
            if xs.iter().any(|&c| c < 0) {
                continue;
            }
            if self.mode == Mode::NonExtended && !self.root.in_root_lattice(&xs) {
                continue;
            }
            let w1 = self.mul(&v, &self.translation(&xs));
            let Some(i1) = self.box_index(&w1) else { continue };
            let x: Weight = self.weyl.act(self.weyl.w0, &xs).iter().map(|c| -c).collect();
            let px = self.translation(&x);
            let lsum = self.length(&w1) + l0 + self.length(&px) + self.length(w2);
            if lsum == lz && self.compose(i1, &x, i2) == *z {
                return Some(C0Factor { w1: i1, x, w2: i2 });
            }
        }
        None
    }

    /// `w₁ w₀ p_x w₂⁻¹`.
    pub fn compose(&self, w1: usize, x: &[i64], w2: usize) -> AffineElement {
        let a = self.mul(&self.box_set[w1], &self.w0);
        let b = self.mul(&a, &self.translation(x));
        self.mul(&b, &self.inverse(&self.box_set[w2]))
    }

    pub fn is_in_c0(&self, z: &AffineElement) -> bool {
        self.c0_factorize(z).is_some()
    }

    /// Element JSON `{"omega": k, "finite": [word], "translation": [..]}`.
    pub fn element_to_json(&self, w: &AffineElement) -> Value {
        json!({
            "omega": self.omega_index(w),
            "finite": self.weyl.words[w.fin as usize].iter().map(|&i| i as u64).collect::<Vec<_>>(),
            "translation": self.trans(w).to_vec(),
        })
    }

    pub fn element_from_json(&self, v: &Value) -> Result<AffineElement> {
        let bad = |m: &str| Error::Parse(format!("element JSON: {m}"));
        let word: Vec<u8> = v["finite"]
            .as_array()
            .ok_or_else(|| bad("missing finite word"))?
            .iter()
            .map(|x| x.as_u64().map(|n| n as u8).ok_or_else(|| bad("bad finite generator")))
            .collect::<Result<_>>()?;
        let trans: Vec<i64> = v["translation"]
            .as_array()
            .ok_or_else(|| bad("missing translation"))?
            .iter()
            .map(|x| x.as_i64().ok_or_else(|| bad("bad translation entry")))
            .collect::<Result<_>>()?;
        if trans.len() != self.rank {
            return Err(Error::DatumMismatch(format!("translation has {} coordinates, expected {}", trans.len(), self.rank)));
        }
        if trans.iter().any(|c| c.abs() > MAX_TRANSLATION) {
            return Err(bad("translation out of range"));
        }
        let u = self.weyl.from_word(&word)?;
        let w = AffineElement { trans: pack(&trans), fin: u };
        self.validate(&w)?;
        if let Some(k) = v.get("omega") {
            let k = k.as_u64().ok_or_else(|| bad("bad omega"))? as usize;
            if k != self.omega_index(&w) {
                return Err(bad("omega label inconsistent with translation"));
            }
        }
        Ok(w)
    }

    /// Compact human-readable form `π_k s_i s_j …`.
    pub fn element_name(&self, w: &AffineElement) -> String {
        let (k, word) = self.reduced_word(w);
        let mut s = String::new();
        if k != 0 {
            s.push_str(&format!("π{k}"));
        }
        for i in word {
            s.push_str(&format!("s{i}"));
        }
        if s.is_empty() {
            s.push('e');
        }
        s
    }

    /// Standard parabolic subgroup `W_I ⊂ W₀` (I ⊂ {1..r}), as finite indices.
    pub fn parabolic(&self, subset: &[usize]) -> Vec<FinIdx> {
        let mut seen: BTreeSet<FinIdx> = BTreeSet::new();
        seen.insert(self.weyl.identity());
        let mut stack = vec![self.weyl.identity()];
        while let Some(u) = stack.pop() {
            for &i in subset {
                let v = self.weyl.mul(u, self.weyl.gens[i - 1]);
                if seen.insert(v) {
                    stack.push(v);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Longest element of `W_I`.
    pub fn parabolic_longest(&self, subset: &[usize]) -> FinIdx {
        *self.parabolic(subset).iter().max_by_key(|&&u| (self.weyl.lengths[u as usize], u)).unwrap()
    }

    /// Conjugacy classes of generators as lists of indices.
    pub fn generator_classes(&self) -> Vec<Vec<usize>> {
        let n = self.num_gens();
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut assigned = vec![false; n];
        let conj = |i: usize, j: usize| -> bool {
            let mut group: HashMap<usize, ()> = HashMap::new();
            group.insert(i, ());
            let mut stack = vec![i];
            while let Some(a) = stack.pop() {
                for b in 0..n {
                    let linked = (a != b && self.coxeter[a][b] % 2 == 1)
                        || self.omega.iter().any(|pi| {
                            self.mul(&self.mul(pi, &self.gens[a]), &self.inverse(pi)) == self.gens[b]
                        });
                    if linked && group.insert(b, ()).is_none() {
                        stack.push(b);
                    }
                }
            }
            group.contains_key(&j)
        };
        for i in 0..n {
            if assigned[i] {
                continue;
            }
            let cls: Vec<usize> = (i..n).filter(|&j| !assigned[j] && conj(i, j)).collect();
            for &j in &cls {
                assigned[j] = true;
            }
            classes.push(cls);
        }
        classes
    }
}

pub(crate) fn div_floor(a: i64, b: i64) -> i64 {
    a.div_euclid(b)
}

fn for_each_product(ranges: &[Vec<i64>], cur: &mut Vec<i64>, i: usize, f: &mut dyn FnMut(&[i64])) {
    if i == ranges.len() {
        f(cur);
        return;
    }
    for &v in &ranges[i] {
        cur[i] = v;
        for_each_product(ranges, cur, i + 1, f);
    }
}

/// Small weights covering every class of P/Q.
fn all_small(r: usize, det: i64) -> Vec<Vec<i64>> {
    let bound = det.min(4);
    let mut out = Vec::new();
    let mut cur = vec![0i64; r];
    let ranges: Vec<Vec<i64>> = (0..r).map(|_| (0..bound).collect()).collect();
    for_each_product(&ranges, &mut cur, 0, &mut |x| out.push(x.to_vec()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn datum(t: &str, mode: Mode, w: &[i64]) -> CellDatum {
        let ws = w.iter().map(|&k| GammaElement::new(&[k]).unwrap()).collect();
        CellDatum::new(t.parse().unwrap(), mode, ws).unwrap()
    }

    #[test]
    fn generators_are_involutions_of_length_one() {
        for (t, w) in [("A1", vec![1, 1]), ("A2", vec![1, 1, 1]), ("C2", vec![2, 1, 2]), ("G2", vec![1, 1, 3])] {
            let d = datum(t, Mode::Extended, &w);
            for g in &d.gens {
                assert_eq!(d.length(g), 1);
                assert_eq!(d.mul(g, g), d.identity());
            }
            assert_eq!(d.omega.len() as i64, if t == "G2" { 1 } else { d.root.cartan_det() });
            assert_eq!(d.box_elements().len(), d.weyl.order());
        }
    }

    #[test]
    fn coxeter_matrices() {
        let a1 = datum("A1", Mode::Extended, &[1, 1]);
        assert_eq!(a1.coxeter[0][1], 0);
        let c2 = datum("C2", Mode::Extended, &[1, 1, 1]);
        let mut m: Vec<u32> = vec![c2.coxeter[0][1], c2.coxeter[1][2], c2.coxeter[0][2]];
        m.sort();
        assert_eq!(m, vec![2, 4, 4]);
        let g2 = datum("G2", Mode::Extended, &[1, 1, 1]);
        let mut m: Vec<u32> = vec![g2.coxeter[0][1], g2.coxeter[1][2], g2.coxeter[0][2]];
        m.sort();
        assert_eq!(m, vec![2, 3, 6]);
    }

    #[test]
    fn conjugacy_constraint_is_enforced() {
        let ws = [1, 2, 1].iter().map(|&k| GammaElement::new(&[k]).unwrap()).collect();
        let err = CellDatum::new("A2".parse().unwrap(), Mode::Extended, ws).unwrap_err();
        assert!(err.to_string().contains("conjugacy"), "{err}");
        let ws = [2, 1, 1].iter().map(|&k| GammaElement::new(&[k]).unwrap()).collect();
        assert!(CellDatum::new("C2".parse().unwrap(), Mode::Extended, ws).is_err());
        let ws: Vec<GammaElement> = [1, 1, 2].iter().map(|&k| GammaElement::new(&[k]).unwrap()).collect();
        assert!(CellDatum::new("C2".parse().unwrap(), Mode::NonExtended, ws).is_ok());
    }

    #[test]
    fn a1_ball_zero_and_box() {
        let d = datum("A1", Mode::Extended, &[1, 1]);
        assert_eq!(d.enumerate_ball(0).len(), 2);
        let b: BTreeSet<_> = d.box_elements().iter().copied().collect();
        assert_eq!(b, d.omega.iter().copied().collect());
    }
}
