//! Finite root data: Cartan matrices, roots and coroots, the finite Weyl group,
//! weight multiplicities, tensor product multiplicities and characters.
//!
//! Weights are written in fundamental-weight coordinates. The Cartan matrix is
//! `cartan[i][j] = <α_i^∨, α_j>`, so `α_j` has ω-coordinates given by column `j`.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::int::Int;

pub type Weight = SmallVec<[i64; 4]>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CartanType {
    A(usize),
    B(usize),
    C(usize),
    D(usize),
    E(usize),
    F4,
    G2,
}

impl CartanType {
    pub fn rank(&self) -> usize {
        match *self {
            CartanType::A(n) | CartanType::B(n) | CartanType::C(n) | CartanType::D(n) | CartanType::E(n) => n,
            CartanType::F4 => 4,
            CartanType::G2 => 2,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            CartanType::A(n) => n >= 1,
            CartanType::B(n) | CartanType::C(n) => n >= 2,
            CartanType::D(n) => n >= 4,
            CartanType::E(n) => (6..=8).contains(&n),
            CartanType::F4 | CartanType::G2 => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("unsupported Cartan type {self}")))
        }
    }

    /// Squared root lengths `(α_i, α_i)/2`, with short roots normalized to 1.
    fn half_norms(&self) -> Vec<i64> {
        let r = self.rank();
        match *self {
            CartanType::A(_) | CartanType::D(_) | CartanType::E(_) => vec![1; r],
            CartanType::B(_) => (0..r).map(|i| if i + 1 == r { 1 } else { 2 }).collect(),
            CartanType::C(_) => (0..r).map(|i| if i + 1 == r { 2 } else { 1 }).collect(),
            CartanType::F4 => vec![2, 2, 1, 1],
            CartanType::G2 => vec![1, 3],
        }
    }

    /// Off-diagonal Dynkin edges `(i, j)` with `(α_i, α_j) < 0`, zero based,
    /// Bourbaki numbering.
    fn edges(&self) -> Vec<(usize, usize)> {
        let r = self.rank();
        let chain = |n: usize| (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect::<Vec<_>>();
        match *self {
            CartanType::A(_) | CartanType::B(_) | CartanType::C(_) | CartanType::F4 | CartanType::G2 => chain(r),
            CartanType::D(_) => {
                let mut e = chain(r - 1);
                e.push((r - 3, r - 1));
                e
            }
            CartanType::E(_) => {
                // 1-3-4-5-6(-7-8), 2 attached to 4.
                let mut e = vec![(0, 2), (1, 3), (2, 3)];
                for i in 3..r - 1 {
                    e.push((i, i + 1));
                }
                e
            }
        }
    }

    pub fn cartan_matrix(&self) -> Vec<Vec<i64>> {
        let r = self.rank();
        let d = self.half_norms();
        // (α_i, α_j) for an edge is -max(d_i, d_j) in these normalizations.
        let mut c = vec![vec![0i64; r]; r];
        for (i, row) in c.iter_mut().enumerate() {
            row[i] = 2;
        }
        for (i, j) in self.edges() {
            let ip = -d[i].max(d[j]);
            c[i][j] = ip / d[i];
            c[j][i] = ip / d[j];
        }
        c
    }
}

impl fmt::Display for CartanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CartanType::A(n) => write!(f, "A{n}"),
            CartanType::B(n) => write!(f, "B{n}"),
            CartanType::C(n) => write!(f, "C{n}"),
            CartanType::D(n) => write!(f, "D{n}"),
            CartanType::E(n) => write!(f, "E{n}"),
            CartanType::F4 => write!(f, "F4"),
            CartanType::G2 => write!(f, "G2"),
        }
    }
}

impl FromStr for CartanType {
    type Err = Error;
    fn from_str(s: &str) -> Result<CartanType> {
        let s = s.trim();
        let bad = || Error::Config(format!("unknown Cartan type {s:?}"));
        let mut chars = s.chars();
        let letter = chars.next().ok_or_else(bad)?.to_ascii_uppercase();
        let n: usize = chars.as_str().trim_start_matches('_').parse().map_err(|_| bad())?;
        let t = match (letter, n) {
            ('A', n) => CartanType::A(n),
            ('B', n) => CartanType::B(n),
            ('C', n) => CartanType::C(n),
            ('D', n) => CartanType::D(n),
            ('E', n) => CartanType::E(n),
            ('F', 4) => CartanType::F4,
            ('G', 2) => CartanType::G2,
            _ => return Err(bad()),
        };
        t.validate()?;
        Ok(t)
    }
}

/// A dominant weight: all ω-coordinates nonnegative.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DominantWeight(Weight);

impl DominantWeight {
    pub fn new(w: Weight) -> Result<DominantWeight> {
        if w.iter().any(|&c| c < 0) {
            return Err(Error::Domain(format!("{w:?} is not dominant")));
        }
        Ok(DominantWeight(w))
    }

    pub fn weight(&self) -> &Weight {
        &self.0
    }
}

/// Element of the finite Weyl group, indexed into `FiniteWeyl::elems`.
pub type FinIdx = u16;

pub struct FiniteWeyl {
    /// Action matrices on ω-coordinates, row major.
    pub mats: Vec<Vec<i64>>,
    pub words: Vec<Vec<u8>>,
    pub lengths: Vec<u32>,
    pub mul: Vec<FinIdx>,
    pub inv: Vec<FinIdx>,
    /// `neg[u * npos + j]`: whether `u^{-1}(α_j) < 0`.
    pub neg: Vec<bool>,
    pub gens: Vec<FinIdx>,
    pub w0: FinIdx,
    npos: usize,
    rank: usize,
}

impl FiniteWeyl {
    pub fn order(&self) -> usize {
        self.mats.len()
    }

    pub fn identity(&self) -> FinIdx {
        0
    }

    pub fn mul(&self, a: FinIdx, b: FinIdx) -> FinIdx {
        self.mul[a as usize * self.order() + b as usize]
    }

    pub fn inv(&self, a: FinIdx) -> FinIdx {
        self.inv[a as usize]
    }

    pub fn act(&self, u: FinIdx, x: &[i64]) -> Weight {
        let m = &self.mats[u as usize];
        let r = self.rank;
        (0..r).map(|i| (0..r).map(|j| m[i * r + j] * x[j]).sum()).collect()
    }

    /// `u^{-1}(α_j) < 0` for positive root `j`.
    pub fn inverts(&self, u: FinIdx, j: usize) -> bool {
        self.neg[u as usize * self.npos + j]
    }

    pub fn from_word(&self, word: &[u8]) -> Result<FinIdx> {
        let mut u = self.identity();
        for &i in word {
            if i == 0 || i as usize > self.rank {
                return Err(Error::Parse(format!("finite generator index {i} out of range 1..={}", self.rank)));
            }
            u = self.mul(u, self.gens[i as usize - 1]);
        }
        Ok(u)
    }
}

pub struct RootDatum {
    pub kind: CartanType,
    pub rank: usize,
    pub cartan: Vec<Vec<i64>>,
    /// Positive roots in simple-root coordinates.
    pub pos_roots: Vec<Vec<i64>>,
    /// Positive roots in ω-coordinates.
    pub pos_roots_omega: Vec<Weight>,
    /// Matching coroots in simple-coroot coordinates.
    pub pos_coroots: Vec<Vec<i64>>,
    half_norms: Vec<i64>,
    /// `adj = det * cartan^{-1}`.
    adj: Vec<Vec<i64>>,
    det: i64,
    weyl: OnceLock<std::result::Result<Arc<FiniteWeyl>, Error>>,
    chars: Mutex<HashMap<Weight, Arc<Vec<(Weight, i64)>>>>,
    tensors: Mutex<HashMap<(Weight, Weight), Arc<Vec<(Weight, i64)>>>>,
}

impl fmt::Debug for RootDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RootDatum({})", self.kind)
    }
}

/// Upper limit on |W₀| for group-table based computations.
pub const MAX_WEYL_TABLE: usize = 1152;

impl RootDatum {
    pub fn new(kind: CartanType) -> Result<RootDatum> {
        kind.validate()?;
        let cartan = kind.cartan_matrix();
        let r = kind.rank();
        let (adj, det) = adjugate(&cartan);
        let mut pos_roots: Vec<Vec<i64>> = Vec::new();
        let mut pos_coroots: Vec<Vec<i64>> = Vec::new();
        let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();
        let mut queue: VecDeque<(Vec<i64>, Vec<i64>)> = VecDeque::new();
        for i in 0..r {
            let mut e = vec![0; r];
            e[i] = 1;
            queue.push_back((e.clone(), e));
        }
        while let Some((b, c)) = queue.pop_front() {
            if seen.contains_key(&b) {
                continue;
            }
            seen.insert(b.clone(), pos_roots.len());
            pos_roots.push(b.clone());
            pos_coroots.push(c.clone());
            for i in 0..r {
                let pair: i64 = (0..r).map(|j| b[j] * cartan[i][j]).sum();
                let copair: i64 = (0..r).map(|j| c[j] * cartan[j][i]).sum();
                let mut nb = b.clone();
                nb[i] -= pair;
                let mut nc = c.clone();
                nc[i] -= copair;
                if nb.iter().all(|&x| x >= 0) && nb.iter().any(|&x| x > 0) && !seen.contains_key(&nb) {
                    queue.push_back((nb, nc));
                }
            }
        }
        // Sort by height, then lexicographically, for determinism.
        let mut idx: Vec<usize> = (0..pos_roots.len()).collect();
        idx.sort_by_key(|&k| (pos_roots[k].iter().sum::<i64>(), pos_roots[k].clone()));
        let pos_roots: Vec<Vec<i64>> = idx.iter().map(|&k| pos_roots[k].clone()).collect();
        let pos_coroots: Vec<Vec<i64>> = idx.iter().map(|&k| pos_coroots[k].clone()).collect();
        let pos_roots_omega =
            pos_roots.iter().map(|b| (0..r).map(|i| (0..r).map(|j| cartan[i][j] * b[j]).sum()).collect()).collect();
        Ok(RootDatum {
            kind,
            rank: r,
            cartan,
            pos_roots,
            pos_roots_omega,
            pos_coroots,
            half_norms: kind.half_norms(),
            adj,
            det,
            weyl: OnceLock::new(),
            chars: Mutex::new(HashMap::new()),
            tensors: Mutex::new(HashMap::new()),
        })
    }

    pub fn num_pos_roots(&self) -> usize {
        self.pos_roots.len()
    }

    /// ω-coordinates of the simple root `α_i` (zero based).
    pub fn simple_root(&self, i: usize) -> Weight {
        (0..self.rank).map(|k| self.cartan[k][i]).collect()
    }

    pub fn rho(&self) -> Weight {
        SmallVec::from_elem(1, self.rank)
    }

    /// `<x, β^∨>` for positive root index `j`.
    pub fn pair_coroot(&self, x: &[i64], j: usize) -> i64 {
        self.pos_coroots[j].iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Index of the positive root whose coroot is the highest coroot.
    pub fn highest_short_root(&self) -> usize {
        (0..self.num_pos_roots()).max_by_key(|&j| (self.pos_coroots[j].iter().sum::<i64>(), j)).unwrap()
    }

    /// Scaled coordinates `det * cartan^{-1} x` of `x` in the simple-root basis.
    pub fn alpha_coords_scaled(&self, x: &[i64]) -> Vec<i64> {
        self.adj.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn cartan_det(&self) -> i64 {
        self.det
    }

    pub fn in_root_lattice(&self, x: &[i64]) -> bool {
        self.alpha_coords_scaled(x).iter().all(|c| c % self.det == 0)
    }

    /// Class of `x` in P/Q, as residues of the scaled simple-root coordinates.
    pub fn lattice_class(&self, x: &[i64]) -> Vec<i64> {
        self.alpha_coords_scaled(x).iter().map(|c| c.rem_euclid(self.det)).collect()
    }

    /// `det(cartan) * (x, y)` for the invariant form normalized by short roots.
    fn form_scaled(&self, x: &[i64], y: &[i64]) -> i64 {
        let a = self.alpha_coords_scaled(x);
        (0..self.rank).map(|j| a[j] * self.half_norms[j] * y[j]).sum()
    }

    pub fn reflect(&self, x: &[i64], i: usize) -> Weight {
        let xi = x[i];
        (0..self.rank).map(|k| x[k] - xi * self.cartan[k][i]).collect()
    }

    /// Dominant representative of the W₀-orbit of `x`, with the parity of the
    /// number of reflections used.
    pub fn dominate(&self, x: &[i64]) -> (Weight, bool) {
        let mut v: Weight = x.iter().copied().collect();
        let mut odd = false;
        while let Some(i) = (0..self.rank).find(|&i| v[i] < 0) {
            v = self.reflect(&v, i);
            odd = !odd;
        }
        (v, odd)
    }

    pub fn is_dominant(&self, x: &[i64]) -> bool {
        x.iter().all(|&c| c >= 0)
    }

    pub fn orbit(&self, x: &[i64]) -> Vec<Weight> {
        let start: Weight = x.iter().copied().collect();
        let mut seen = std::collections::BTreeSet::new();
        seen.insert(start.clone());
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for i in 0..self.rank {
                if v[i] != 0 {
                    let w = self.reflect(&v, i);
                    if seen.insert(w.clone()) {
                        queue.push_back(w);
                    }
                }
            }
        }
        seen.into_iter().collect()
    }

    fn check_weight(&self, x: &[i64]) -> Result<()> {
        if x.len() != self.rank {
            return Err(Error::DatumMismatch(format!("weight {x:?} has rank {}, expected {}", x.len(), self.rank)));
        }
        Ok(())
    }

    fn check_dominant(&self, x: &[i64]) -> Result<()> {
        self.check_weight(x)?;
        if !self.is_dominant(x) {
            return Err(Error::Domain(format!("{x:?} is not dominant")));
        }
        Ok(())
    }

    /// Dominant weights μ ≤ λ with their multiplicities in V(λ) (Freudenthal).
    pub fn dominant_character(&self, lambda: &[i64]) -> Result<Arc<Vec<(Weight, i64)>>> {
        self.check_dominant(lambda)?;
        let key: Weight = lambda.iter().copied().collect();
        if let Some(c) = self.chars.lock().unwrap().get(&key) {
            return Ok(c.clone());
        }
        let c = Arc::new(self.freudenthal(&key));
        self.chars.lock().unwrap().insert(key, c.clone());
        Ok(c)
    }

    fn freudenthal(&self, lambda: &Weight) -> Vec<(Weight, i64)> {
        // Dominant weights below λ are connected to λ by positive roots.
        let mut dom: std::collections::BTreeSet<Weight> = std::collections::BTreeSet::new();
        dom.insert(lambda.clone());
        let mut queue = VecDeque::from([lambda.clone()]);
        while let Some(mu) = queue.pop_front() {
            for a in &self.pos_roots_omega {
                let nu: Weight = mu.iter().zip(a).map(|(m, x)| m - x).collect();
                if self.is_dominant(&nu) && dom.insert(nu.clone()) {
                    queue.push_back(nu);
                }
            }
        }
        let height = |mu: &Weight| -> i64 {
            let diff: Vec<i64> = lambda.iter().zip(mu).map(|(l, m)| l - m).collect();
            self.alpha_coords_scaled(&diff).iter().sum()
        };
        let mut order: Vec<Weight> = dom.iter().cloned().collect();
        order.sort_by_key(|m| (height(m), m.clone()));
        let rho = self.rho();
        let lr: Weight = lambda.iter().zip(&rho).map(|(a, b)| a + b).collect();
        let norm_lr = self.form_scaled(&lr, &lr);
        let mut mult: HashMap<Weight, i64> = HashMap::new();
        mult.insert(lambda.clone(), 1);
        for mu in order.iter().skip(1) {
            let mr: Weight = mu.iter().zip(&rho).map(|(a, b)| a + b).collect();
            let denom = norm_lr - self.form_scaled(&mr, &mr);
            let mut num = 0i64;
            for a in &self.pos_roots_omega {
                let mut k = 1i64;
                loop {
                    let v: Weight = mu.iter().zip(a).map(|(m, x)| m + k * x).collect();
                    let (d, _) = self.dominate(&v);
                    match mult.get(&d) {
                        Some(&m) => num += m * self.form_scaled(&v, a),
                        None => break,
                    }
                    k += 1;
                }
            }
            let num = 2 * num;
            assert!(denom > 0 && num % denom == 0, "Freudenthal recursion is not integral");
            let m = num / denom;
            if m != 0 {
                mult.insert(mu.clone(), m);
            }
        }
        let mut out: Vec<(Weight, i64)> = mult.into_iter().collect();
        out.sort();
        out
    }

    /// d(x', x): multiplicity of the weight x' in V(x).
    pub fn weight_multiplicity(&self, xp: &[i64], x: &[i64]) -> Result<i64> {
        self.check_weight(xp)?;
        let ch = self.dominant_character(x)?;
        let (d, _) = self.dominate(xp);
        Ok(ch.iter().find(|(w, _)| *w == d).map(|(_, m)| *m).unwrap_or(0))
    }

    /// All weights of V(x) with multiplicities, sorted.
    pub fn weights(&self, x: &[i64]) -> Result<Vec<(Weight, i64)>> {
        let ch = self.dominant_character(x)?;
        let mut out = Vec::new();
        for (mu, m) in ch.iter() {
            for w in self.orbit(mu) {
                out.push((w, *m));
            }
        }
        out.sort();
        Ok(out)
    }

    /// Decomposition of V(x) ⊗ V(y) into irreducibles (Brauer–Klimyk).
    pub fn tensor_decomposition(&self, x: &[i64], y: &[i64]) -> Result<Arc<Vec<(Weight, i64)>>> {
        self.check_dominant(x)?;
        self.check_dominant(y)?;
        let (a, b): (Weight, Weight) = (x.iter().copied().collect(), y.iter().copied().collect());
        let key = if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        if let Some(t) = self.tensors.lock().unwrap().get(&key) {
            return Ok(t.clone());
        }
        // Sum over the weights of the smaller module.
        let (big, small) = if self.dim_irrep(&key.0)? >= self.dim_irrep(&key.1)? {
            (&key.0, &key.1)
        } else {
            (&key.1, &key.0)
        };
        let mut acc: BTreeMap<Weight, i64> = BTreeMap::new();
        for (nu, m) in self.weights(small)? {
            let v: Weight = big.iter().zip(&nu).map(|(l, n)| l + n + 1).collect();
            let (d, odd) = self.dominate(&v);
            if d.iter().any(|&c| c == 0) {
                continue;
            }
            let hw: Weight = d.iter().map(|c| c - 1).collect();
            *acc.entry(hw).or_insert(0) += if odd { -m } else { m };
        }
        let out: Vec<(Weight, i64)> = acc.into_iter().filter(|(_, m)| *m != 0).collect();
        assert!(out.iter().all(|(_, m)| *m > 0), "negative tensor multiplicity");
        let out = Arc::new(out);
        self.tensors.lock().unwrap().insert(key, out.clone());
        Ok(out)
    }

    /// m(x, y, z): multiplicity of V(z) in V(x) ⊗ V(y).
    pub fn tensor_multiplicity(&self, x: &[i64], y: &[i64], z: &[i64]) -> Result<i64> {
        self.check_dominant(z)?;
        let t = self.tensor_decomposition(x, y)?;
        Ok(t.iter().find(|(w, _)| w.as_slice() == z).map(|(_, m)| *m).unwrap_or(0))
    }

    /// Weyl dimension formula.
    pub fn dim_irrep(&self, x: &[i64]) -> Result<i64> {
        self.check_dominant(x)?;
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for j in 0..self.num_pos_roots() {
            let h: i64 = self.pos_coroots[j].iter().sum();
            num *= BigInt::from(self.pair_coroot(x, j) + h);
            den *= BigInt::from(h);
        }
        let q = &num / &den;
        assert!(&q * &den == num);
        q.to_i64().ok_or_else(|| Error::Resource("dimension overflows i64".into()))
    }

    /// χ_x(t) = Σ d(x', x) t^{x'}, with `t` given on the ω-coordinates.
    pub fn character_eval<F: Field>(&self, field: &F, x: &[i64], t: &[F::Elem]) -> Result<F::Elem> {
        if t.len() != self.rank {
            return Err(Error::DatumMismatch(format!("torus point has {} coordinates, expected {}", t.len(), self.rank)));
        }
        if t.iter().any(|c| field.is_zero(c)) {
            return Err(Error::Domain("torus coordinates must be nonzero".into()));
        }
        let mut acc = field.zero();
        for (w, m) in self.weights(x)? {
            let mut term = field.from_int(&Int::from(m));
            for (ti, e) in t.iter().zip(&w) {
                term = field.mul(&term, &field.pow(ti, *e).unwrap());
            }
            acc = field.add(&acc, &term);
        }
        Ok(acc)
    }

    pub fn finite_weyl(&self) -> Result<Arc<FiniteWeyl>> {
        self.weyl.get_or_init(|| self.build_weyl().map(Arc::new)).clone()
    }

    fn build_weyl(&self) -> Result<FiniteWeyl> {
        let r = self.rank;
        let rho = self.rho();
        let gen_mat = |i: usize| -> Vec<i64> {
            let mut m = vec![0i64; r * r];
            for k in 0..r {
                m[k * r + k] = 1;
                m[k * r + i] -= self.cartan[k][i];
            }
            m
        };
        let matmul = |a: &[i64], b: &[i64]| -> Vec<i64> {
            let mut c = vec![0i64; r * r];
            for i in 0..r {
                for k in 0..r {
                    let aik = a[i * r + k];
                    if aik != 0 {
                        for j in 0..r {
                            c[i * r + j] += aik * b[k * r + j];
                        }
                    }
                }
            }
            c
        };
        let apply = |m: &[i64], x: &[i64]| -> Weight { (0..r).map(|i| (0..r).map(|j| m[i * r + j] * x[j]).sum()).collect() };
        let gens: Vec<Vec<i64>> = (0..r).map(gen_mat).collect();
        let mut ident = vec![0i64; r * r];
        for k in 0..r {
            ident[k * r + k] = 1;
        }
        // BFS by length; key elements by u(ρ).
        let mut mats = vec![ident];
        let mut lengths = vec![0u32];
        let mut index: HashMap<Weight, usize> = HashMap::new();
        index.insert(rho.clone(), 0);
        let mut frontier = vec![0usize];
        let mut len = 0;
        while !frontier.is_empty() {
            len += 1;
            let mut next = Vec::new();
            for &u in &frontier {
                for g in &gens {
                    let m = matmul(g, &mats[u]);
                    let key = apply(&m, &rho);
                    if !index.contains_key(&key) {
                        if mats.len() >= MAX_WEYL_TABLE {
                            return Err(Error::Resource(format!(
                                "finite Weyl group of {} exceeds {MAX_WEYL_TABLE} elements",
                                self.kind
                            )));
                        }
                        index.insert(key, mats.len());
                        mats.push(m);
                        lengths.push(len);
                        next.push(mats.len() - 1);
                    }
                }
            }
            frontier = next;
        }
        let n = mats.len();
        let images: Vec<Weight> = mats.iter().map(|m| apply(m, &rho)).collect();
        let mut mul = vec![0 as FinIdx; n * n];
        for a in 0..n {
            for b in 0..n {
                let img = apply(&mats[a], &images[b]);
                mul[a * n + b] = index[&img] as FinIdx;
            }
        }
        let mut inv = vec![0 as FinIdx; n];
        for a in 0..n {
            inv[a] = (0..n).find(|&b| mul[a * n + b] == 0).unwrap() as FinIdx;
        }
        let gen_idx: Vec<FinIdx> = gens.iter().map(|g| index[&apply(g, &rho)] as FinIdx).collect();
        let w0 = (0..n).max_by_key(|&u| lengths[u]).unwrap() as FinIdx;
        // Signed root lookup by ω-coordinates.
        let mut roots: HashMap<Weight, (usize, bool)> = HashMap::new();
        for (j, a) in self.pos_roots_omega.iter().enumerate() {
            roots.insert(a.clone(), (j, true));
            roots.insert(a.iter().map(|c| -c).collect(), (j, false));
        }
        let npos = self.num_pos_roots();
        let mut neg = vec![false; n * npos];
        for u in 0..n {
            let ui = &mats[inv[u] as usize];
            for (j, a) in self.pos_roots_omega.iter().enumerate() {
                let img = apply(ui, a);
                neg[u * npos + j] = !roots[&img].1;
            }
        }
        // Reduced words: peel the smallest-index right descent.
        let mut words = vec![Vec::new(); n];
        for u in 0..n {
            let mut v = u;
            let mut rev = Vec::new();
            while lengths[v] > 0 {
                let i = (0..r).find(|&i| lengths[mul[v * n + gen_idx[i] as usize] as usize] < lengths[v]).unwrap();
                rev.push(i as u8 + 1);
                v = mul[v * n + gen_idx[i] as usize] as usize;
            }
            rev.reverse();
            words[u] = rev;
        }
        Ok(FiniteWeyl { mats, words, lengths, mul, inv, neg, gens: gen_idx, w0, npos, rank: r })
    }
}

fn adjugate(m: &[Vec<i64>]) -> (Vec<Vec<i64>>, i64) {
    use num_rational::Ratio;
    let n = m.len();
    let mut a: Vec<Vec<Ratio<i64>>> = m.iter().map(|r| r.iter().map(|&x| Ratio::from_integer(x)).collect()).collect();
    let mut inv: Vec<Vec<Ratio<i64>>> =
        (0..n).map(|i| (0..n).map(|j| Ratio::from_integer(i64::from(i == j))).collect()).collect();
    let mut det = Ratio::from_integer(1);
    for c in 0..n {
        let p = (c..n).find(|&i| a[i][c] != Ratio::from_integer(0)).expect("singular Cartan matrix");
        if p != c {
            a.swap(p, c);
            inv.swap(p, c);
            det = -det;
        }
        let pv = a[c][c];
        det *= pv;
        for j in 0..n {
            a[c][j] /= pv;
            inv[c][j] /= pv;
        }
        for i in 0..n {
            if i != c {
                let f = a[i][c];
                if f != Ratio::from_integer(0) {
                    for j in 0..n {
                        let (acj, icj) = (a[c][j], inv[c][j]);
                        a[i][j] -= f * acj;
                        inv[i][j] -= f * icj;
                    }
                }
            }
        }
    }
    let d = det.to_integer();
    let adj = inv.iter().map(|r| r.iter().map(|x| (*x * d).to_integer()).collect()).collect();
    (adj, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rd(s: &str) -> RootDatum {
        RootDatum::new(s.parse().unwrap()).unwrap()
    }

    #[test]
    fn root_counts_and_group_orders() {
        for (t, np, w) in [("A1", 1, 2), ("A2", 3, 6), ("B2", 4, 8), ("C3", 9, 48), ("G2", 6, 12), ("D4", 12, 192), ("F4", 24, 1152)] {
            let d = rd(t);
            assert_eq!(d.num_pos_roots(), np, "{t}");
            assert_eq!(d.finite_weyl().unwrap().order(), w, "{t}");
        }
        assert_eq!(rd("E8").num_pos_roots(), 120);
        assert!(rd("E6").finite_weyl().is_err());
    }

    #[test]
    fn small_examples() {
        let a2 = rd("A2");
        assert_eq!(a2.weight_multiplicity(&[0, 0], &[1, 1]).unwrap(), 2);
        assert_eq!(a2.weight_multiplicity(&[0, 0], &[1, 0]).unwrap(), 0);
        assert_eq!(a2.tensor_multiplicity(&[1, 0], &[0, 1], &[0, 0]).unwrap(), 1);
        assert_eq!(a2.dim_irrep(&[1, 0]).unwrap(), 3);
        assert_eq!(a2.dim_irrep(&[1, 1]).unwrap(), 8);
        let a1 = rd("A1");
        assert_eq!(a1.tensor_multiplicity(&[1], &[1], &[2]).unwrap(), 1);
        assert_eq!(a1.tensor_multiplicity(&[1], &[1], &[0]).unwrap(), 1);
        let q = crate::field::Rationals;
        let t = vec![q.parse("2").unwrap()];
        assert_eq!(q.render(&a1.character_eval(&q, &[1], &t).unwrap()), "5/2");
    }

    #[test]
    fn highest_short_root_of_b2_and_g2() {
        let b2 = rd("B2");
        let j = b2.highest_short_root();
        assert_eq!(b2.pos_roots[j], vec![1, 1]);
        let g2 = rd("G2");
        assert_eq!(g2.pos_roots[g2.highest_short_root()], vec![2, 1]);
    }
}
