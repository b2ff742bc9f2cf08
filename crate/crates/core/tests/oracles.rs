//! Independent oracles: every quantity here is recomputed by a second route
//! that shares no code path with the library implementation.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};

use lowcell::based_ring::{rep_add, rep_mul, Rep};
use lowcell::field::{Field, Rationals};
use lowcell::root::{RootDatum, Weight};
use lowcell::spectra::{rep_det, rep_star, zeta, Spectra, Specialization};
use lowcell::{AffineElement, CellContext, CellDatum, GammaElement, Hecke, Int, KlTable, Laurent, Mode};

fn datum(t: &str, mode: Mode, w: &[i64]) -> Arc<CellDatum> {
    let ws = w.iter().map(|&k| GammaElement::new(&[k]).unwrap()).collect();
    Arc::new(CellDatum::new(t.parse().unwrap(), mode, ws).unwrap())
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn qpow(b: &BigRational, e: i64) -> BigRational {
    let mut acc = BigRational::one();
    let base = if e < 0 { b.recip() } else { b.clone() };
    for _ in 0..e.unsigned_abs() {
        acc *= &base;
    }
    acc
}

/// Leibniz expansion over all permutations.
fn leibniz<T: Clone>(n: usize, one: T, entry: impl Fn(usize, usize) -> T, mul: impl Fn(&T, &T) -> T, add: impl Fn(&mut T, &T, i64), zero: T) -> T {
    let mut acc = zero;
    let mut perm: Vec<usize> = (0..n).collect();
    fn rec<T: Clone>(k: usize, perm: &mut Vec<usize>, sign: i64, term: T, entry: &dyn Fn(usize, usize) -> T, mul: &dyn Fn(&T, &T) -> T, out: &mut Vec<(T, i64)>) {
        if k == perm.len() {
            out.push((term, sign));
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            let t = mul(&term, &entry(k, perm[k]));
            rec(k + 1, perm, if i == k { sign } else { -sign }, t, entry, mul, out);
            perm.swap(k, i);
        }
    }
    let mut terms = Vec::new();
    rec(0, &mut perm, 1, one, &entry, &mul, &mut terms);
    for (t, s) in terms {
        add(&mut acc, &t, s);
    }
    acc
}

fn int_det(m: &[i64], n: usize) -> i64 {
    leibniz(n, 1i64, |i, j| m[i * n + j], |a, b| a * b, |acc, t, s| *acc += s * t, 0)
}

fn torus_monomial(t: &[BigRational], mu: &[i64]) -> BigRational {
    t.iter().zip(mu).fold(BigRational::one(), |acc, (ti, &e)| acc * qpow(ti, e))
}

/// `Σ_u ε(u) t^{u(μ)}` with `ε(u) = det u`.
fn alternant(rd: &RootDatum, mu: &[i64], t: &[BigRational]) -> BigRational {
    let w = rd.finite_weyl().unwrap();
    let r = mu.len();
    let mut acc = BigRational::zero();
    for u in 0..w.order() {
        let eps = int_det(&w.mats[u], r);
        assert!(eps == 1 || eps == -1);
        let v = w.act(u as u16, mu);
        let m = torus_monomial(t, &v);
        if eps == 1 {
            acc += m;
        } else {
            acc -= m;
        }
    }
    acc
}

#[test]
fn freudenthal_matches_weyl_character_formula() {
    let points = [vec![q(2, 1), q(3, 1)], vec![q(-1, 2), q(5, 3)], vec![q(7, 1), q(-2, 1)]];
    for kind in ["A2", "B2", "C2", "G2"] {
        let rd = RootDatum::new(kind.parse().unwrap()).unwrap();
        for a in 0..=3 {
            for b in 0..=3 {
                let lam = [a, b];
                let lr = [a + 1, b + 1];
                for t in &points {
                    let den = alternant(&rd, &[1, 1], t);
                    if den.is_zero() {
                        continue;
                    }
                    let weyl = alternant(&rd, &lr, t) / den;
                    let fr = rd.character_eval(&Rationals, &lam, t).unwrap();
                    assert_eq!(weyl, fr, "{kind} V({a},{b}) at {t:?}");
                }
            }
        }
    }
}

#[test]
fn a1_character_is_geometric_sum() {
    let rd = RootDatum::new("A1".parse().unwrap()).unwrap();
    for n in 0..8 {
        let w = rd.weights(&[n]).unwrap();
        let expect: Vec<(Vec<i64>, i64)> = (0..=n).map(|k| (vec![n - 2 * k], 1)).rev().collect();
        let got: Vec<(Vec<i64>, i64)> = w.iter().map(|(x, m)| (x.to_vec(), *m)).collect();
        assert_eq!(got, expect);
    }
}

/// Gelfand–Tsetlin patterns with top row `(a+b, b, 0)`.
fn gt_weights(a: i64, b: i64) -> BTreeMap<Vec<i64>, i64> {
    let (m1, m2, m3) = (a + b, b, 0);
    let mut out = BTreeMap::new();
    for m12 in m2..=m1 {
        for m22 in m3..=m2 {
            for m11 in m22..=m12 {
                let c1 = m11;
                let c2 = m12 + m22 - m11;
                let c3 = m1 + m2 + m3 - m12 - m22;
                *out.entry(vec![c1 - c2, c2 - c3]).or_insert(0) += 1;
            }
        }
    }
    out
}

#[test]
fn a2_weight_multiplicities_match_gelfand_tsetlin() {
    let rd = RootDatum::new("A2".parse().unwrap()).unwrap();
    for a in 0..=5 {
        for b in 0..=5 {
            let got: BTreeMap<Vec<i64>, i64> = rd.weights(&[a, b]).unwrap().into_iter().map(|(x, m)| (x.to_vec(), m)).collect();
            assert_eq!(got, gt_weights(a, b), "V({a},{b})");
            let dim: i64 = got.values().sum();
            assert_eq!(dim, rd.dim_irrep(&[a, b]).unwrap());
        }
    }
}

/// Character convolution with highest weights peeled off by height.
fn convolution(rd: &RootDatum, x: &[i64], y: &[i64]) -> BTreeMap<Vec<i64>, i64> {
    let mut prod: BTreeMap<Vec<i64>, i64> = BTreeMap::new();
    for (a, m) in rd.weights(x).unwrap() {
        for (b, n) in rd.weights(y).unwrap() {
            let s: Vec<i64> = a.iter().zip(b.iter()).map(|(p, q)| p + q).collect();
            *prod.entry(s).or_insert(0) += m * n;
        }
    }
    let height = |w: &[i64]| -> i64 { rd.alpha_coords_scaled(w).iter().sum() };
    let mut out = BTreeMap::new();
    loop {
        prod.retain(|_, m| *m != 0);
        let Some(top) = prod.keys().max_by_key(|w| (height(w), (*w).clone())).cloned() else { break };
        let m = prod[&top];
        assert!(m > 0 && top.iter().all(|&c| c >= 0));
        out.insert(top.clone(), m);
        for (w, k) in rd.weights(&top).unwrap() {
            *prod.entry(w.to_vec()).or_insert(0) -= m * k;
        }
    }
    out
}

#[test]
fn klimyk_matches_character_convolution() {
    for kind in ["A1", "A2", "B2", "C2", "G2"] {
        let rd = RootDatum::new(kind.parse().unwrap()).unwrap();
        let r = rd.kind.rank();
        let small: Vec<Vec<i64>> = if r == 1 { (0..5).map(|a| vec![a]).collect() } else { (0..3).flat_map(|a| (0..3).map(move |b| vec![a, b])).collect() };
        for x in &small {
            for y in &small {
                let k: BTreeMap<Vec<i64>, i64> = rd.tensor_decomposition(x, y).unwrap().iter().map(|(z, m)| (z.to_vec(), *m)).collect();
                assert_eq!(k, convolution(&rd, x, y), "{kind} V{x:?} x V{y:?}");
            }
        }
    }
}

/// Breadth-first search over words: the depth at which an element first appears is its length.
fn word_ball(d: &CellDatum, n: u32) -> HashMap<AffineElement, u32> {
    let mut seen: HashMap<AffineElement, u32> = HashMap::new();
    let mut queue = VecDeque::new();
    for w in &d.omega {
        seen.insert(*w, 0);
        queue.push_back(*w);
    }
    while let Some(w) = queue.pop_front() {
        let l = seen[&w];
        if l == n {
            continue;
        }
        for g in &d.gens {
            let v = d.mul(&w, g);
            if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(v) {
                e.insert(l + 1);
                queue.push_back(v);
            }
        }
    }
    seen
}

#[test]
fn balls_and_lengths_match_word_search() {
    for (t, mode, w, n) in [
        ("A1", Mode::Extended, vec![1, 1], 8),
        ("A2", Mode::Extended, vec![1, 1, 1], 6),
        ("C2", Mode::Extended, vec![2, 1, 2], 6),
        ("C2", Mode::NonExtended, vec![1, 1, 2], 6),
        ("G2", Mode::Extended, vec![1, 1, 3], 6),
    ] {
        let d = datum(t, mode, &w);
        let bfs = word_ball(&d, n);
        let ball: BTreeSet<AffineElement> = d.enumerate_ball(n).into_iter().collect();
        assert_eq!(ball.len(), bfs.len(), "{t} {mode}");
        for (w, l) in &bfs {
            assert!(ball.contains(w));
            assert_eq!(d.length(w), *l, "{t}: {}", d.element_name(w));
        }
    }
}

#[test]
fn factorization_matches_brute_force_composition() {
    for (t, mode, w, r) in [
        ("A1", Mode::Extended, vec![1, 1], 9),
        ("A2", Mode::Extended, vec![1, 1, 1], 9),
        ("C2", Mode::Extended, vec![2, 1, 2], 9),
        ("C2", Mode::NonExtended, vec![1, 1, 2], 10),
    ] {
        let d = datum(t, mode, &w);
        let nb = d.box_elements().len();
        let rank = d.rank;
        let mut xs: Vec<Vec<i64>> = vec![vec![]];
        for _ in 0..rank {
            xs = xs.into_iter().flat_map(|v| (0..=r as i64).map(move |c| [v.clone(), vec![c]].concat())).collect();
        }
        xs.retain(|x| d.is_dominant_lattice(x));
        let mut built: BTreeMap<AffineElement, (usize, Vec<i64>, usize)> = BTreeMap::new();
        for w1 in 0..nb {
            for x in &xs {
                for w2 in 0..nb {
                    let z = d.compose(w1, x, w2);
                    if d.length(&z) <= r {
                        assert!(built.insert(z, (w1, x.clone(), w2)).is_none(), "{t}: two factorizations");
                    }
                }
            }
        }
        let mut found = 0;
        for z in d.enumerate_ball(r) {
            match (d.c0_factorize(&z), built.get(&z)) {
                (Some(f), Some((w1, x, w2))) => {
                    assert_eq!((f.w1, f.x.to_vec(), f.w2), (*w1, x.clone(), *w2));
                    found += 1;
                }
                (None, None) => {}
                (a, b) => panic!("{t}: {} factorize {:?} vs brute force {b:?}", d.element_name(&z), a.map(|f| f.x)),
            }
        }
        assert_eq!(found, built.len());
    }
}

fn rep_leibniz(d: &CellDatum, m: &[Vec<Rep<Laurent>>]) -> Rep<Laurent> {
    let one: Rep<Laurent> = [(Weight::from_elem(0, d.rank), Laurent::one(d.gamma_rank))].into_iter().collect();
    leibniz(
        m.len(),
        one,
        |i, j| m[i][j].clone(),
        |a, b| rep_mul(d, a, b).unwrap(),
        |acc, t, s| {
            for (x, c) in t {
                rep_add(acc, x, &c.scale(&Int::from(s)));
            }
        },
        Rep::new(),
    )
}

#[test]
fn symbolic_determinant_matches_leibniz() {
    for (t, w, radius) in [("A1", vec![1, 1], 8), ("A2", vec![1, 1, 1], 10)] {
        let d = datum(t, Mode::Extended, &w);
        let tab = KlTable::new(d.clone(), radius).unwrap();
        let cx = CellContext::new(&tab);
        let sp = Spectra::new(&cx).unwrap();
        let mut a = rep_det(&d, &sp.m).unwrap();
        let mut b = rep_leibniz(&d, &sp.m);
        a.retain(|_, c| !c.is_zero());
        b.retain(|_, c| !c.is_zero());
        assert_eq!(a, b, "{t}");
    }
}

#[test]
fn numeric_determinant_matches_leibniz() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for n in 1..=6 {
        for _ in 0..10 {
            let m: Vec<Vec<BigRational>> = (0..n).map(|_| (0..n).map(|_| q(rng.random_range(-4..5), rng.random_range(1..4))).collect()).collect();
            let oracle = leibniz(n, BigRational::one(), |i, j| m[i][j].clone(), |a, b| a * b, |acc, t, s| *acc += t * BigRational::from_integer(s.into()), BigRational::zero());
            assert_eq!(lowcell::linalg::det(&Rationals, m.clone()), oracle);
        }
    }
}

/// `m_{w₁,w₂}` recomputed from a T-basis product `C_{w₀w₁⁻¹} C_{w₂w₀}` expanded back into the C-basis.
#[test]
fn m_matrix_matches_t_basis_product() {
    for (t, w, radius) in [("A1", vec![1, 1], 8), ("A2", vec![1, 1, 1], 10), ("C2", vec![2, 1, 2], 12)] {
        let d = datum(t, Mode::Extended, &w);
        let tab = KlTable::new(d.clone(), radius.max(Spectra::required_radius(&d))).unwrap();
        let cx = CellContext::new(&tab);
        let sp = Spectra::new(&cx).unwrap();
        let h = Hecke::new(&d);
        let bx = d.box_elements();
        let w0inv = d.inverse(&d.w0);
        let mut nonzero = 0;
        for (i, w1) in bx.iter().enumerate() {
            let a = tab.kl_element(&d.mul(&d.w0, &d.inverse(w1))).unwrap();
            for (j, w2) in bx.iter().enumerate() {
                let b = tab.kl_element(&d.mul(w2, &d.w0)).unwrap();
                let c = tab.t_to_c(&h.mul(&a, &b)).unwrap();
                let mut oracle: Rep<Laurent> = Rep::new();
                for (z, coeff) in &c {
                    let u = d.mul(&w0inv, &tab.elem(*z));
                    let x = d.trans(&u);
                    if u == d.translation(&x) && d.is_dominant_lattice(&x) && !coeff.is_zero() {
                        oracle.insert(x, coeff.clone());
                    }
                }
                let mut got = sp.m[i][j].clone();
                got.retain(|_, c| !c.is_zero());
                nonzero += usize::from(!oracle.is_empty());
                assert_eq!(got, oracle, "{t} m[{i}][{j}]");
            }
        }
        assert!(nonzero >= bx.len(), "{t}: m-matrix oracle is nearly empty");
    }
}

#[test]
fn m_matrix_is_star_symmetric() {
    for (t, w) in [("A1", vec![1, 1]), ("A2", vec![1, 1, 1]), ("C2", vec![2, 1, 2])] {
        let d = datum(t, Mode::Extended, &w);
        let tab = KlTable::new(d.clone(), Spectra::required_radius(&d)).unwrap();
        let cx = CellContext::new(&tab);
        let sp = Spectra::new(&cx).unwrap();
        let n = sp.size();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(sp.m[i][j], rep_star(&d, &sp.m[j][i]), "{t} ({i},{j})");
            }
        }
    }
}

#[test]
fn parabolic_zeta_examples() {
    let f = Rationals;
    let a2 = datum("A2", Mode::Extended, &[1, 1, 1]);
    let s = Specialization::parse(f, &["2".to_string()]).unwrap();
    assert_eq!(zeta(&a2, &[1, 2], &s), q(105, 8));
    assert_eq!(zeta(&a2, &[1], &s), q(5, 2));
    assert_eq!(zeta(&a2, &[], &s), q(1, 1));
    let a1 = datum("A1", Mode::Extended, &[1, 1]);
    for (n, dd) in [(2, 1), (3, 1), (1, 2), (-5, 3)] {
        let s = Specialization::parse(f, &[format!("{n}/{dd}")]).unwrap();
        let qq = q(n, dd);
        assert_eq!(zeta(&a1, &[1], &s), &qq + qq.recip());
    }
}

#[test]
fn rationals_field_axioms_hold_on_samples() {
    let f = Rationals;
    let a = q(3, 7);
    let b = q(-2, 5);
    assert_eq!(f.mul(&a, &f.inv(&a).unwrap()), f.one());
    assert_eq!(f.add(&a, &b), q(1, 35));
    assert!(f.inv(&f.zero()).is_none());
}
