//! Invariants checked on random inputs.

use std::sync::{Arc, OnceLock};

use proptest::prelude::*;

use lowcell::based_ring::{rep_mul, Rep};
use lowcell::field::{Field, PrimeField, Rationals};
use lowcell::root::{RootDatum, Weight};
use lowcell::spectra::{delta_set, rep_star, Spectra, Specialization, TorusPoint};
use lowcell::{CellContext, CellDatum, GammaElement, Int, KlTable, Laurent, Mode};

fn datum(t: &str, mode: Mode, w: &[i64]) -> Arc<CellDatum> {
    let ws = w.iter().map(|&k| GammaElement::new(&[k]).unwrap()).collect();
    Arc::new(CellDatum::new(t.parse().unwrap(), mode, ws).unwrap())
}

fn c2() -> &'static Arc<CellDatum> {
    static D: OnceLock<Arc<CellDatum>> = OnceLock::new();
    D.get_or_init(|| datum("C2", Mode::Extended, &[2, 1, 2]))
}

fn g2() -> &'static Arc<CellDatum> {
    static D: OnceLock<Arc<CellDatum>> = OnceLock::new();
    D.get_or_init(|| datum("G2", Mode::Extended, &[1, 1, 3]))
}

fn a2_table() -> &'static KlTable {
    static T: OnceLock<KlTable> = OnceLock::new();
    T.get_or_init(|| {
        let d = datum("A2", Mode::Extended, &[1, 1, 1]);
        KlTable::new(d.clone(), Spectra::required_radius(&d)).unwrap()
    })
}

fn a2_spectra() -> &'static Spectra<'static> {
    static CX: OnceLock<CellContext<'static>> = OnceLock::new();
    static SP: OnceLock<Spectra<'static>> = OnceLock::new();
    SP.get_or_init(|| Spectra::new(CX.get_or_init(|| CellContext::new(a2_table()))).unwrap())
}

fn laurent() -> impl Strategy<Value = Laurent> {
    prop::collection::vec((-6i64..=6, -4i64..=4), 0..5)
        .prop_map(|ts| Laurent::from_terms(1, ts.into_iter().map(|(e, c)| (GammaElement::new(&[e]).unwrap(), Int::from(c)))))
}

fn rep(rank: usize) -> impl Strategy<Value = Rep<Laurent>> {
    prop::collection::vec((prop::collection::vec(0i64..=2, rank), laurent()), 0..3).prop_map(|ts| {
        let mut r = Rep::new();
        for (x, c) in ts {
            if !c.is_zero() {
                r.insert(x.into_iter().collect::<Weight>(), c);
            }
        }
        r
    })
}

fn clean(mut a: Rep<Laurent>) -> Rep<Laurent> {
    a.retain(|_, c| !c.is_zero());
    a
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn laurent_ring_laws(a in laurent(), b in laurent(), c in laurent()) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        let mut s = b.clone();
        s.add_assign(&c);
        let mut rhs = a.mul(&b);
        rhs.add_assign(&a.mul(&c));
        prop_assert_eq!(a.mul(&s), rhs);
        prop_assert_eq!(a.bar().bar(), a.clone());
        prop_assert_eq!(a.mul(&b).bar(), a.bar().mul(&b.bar()));
        if !b.is_zero() {
            prop_assert_eq!(a.mul(&b).div_exact(&b), Some(a.clone()));
        }
    }

    #[test]
    fn affine_group_laws(w1 in prop::collection::vec(0usize..3, 0..9), w2 in prop::collection::vec(0usize..3, 0..9),
                         w3 in prop::collection::vec(0usize..3, 0..9), k in 0usize..2) {
        let d = c2();
        let (a, b, c) = (d.from_word(k, &w1).unwrap(), d.from_word(0, &w2).unwrap(), d.from_word(0, &w3).unwrap());
        prop_assert_eq!(d.mul(&d.mul(&a, &b), &c), d.mul(&a, &d.mul(&b, &c)));
        prop_assert_eq!(d.mul(&a, &d.inverse(&a)), d.identity());
        prop_assert_eq!(d.length(&a), d.length(&d.inverse(&a)));
        prop_assert!(d.length(&a) as usize <= w1.len());
        prop_assert_eq!(d.weight_length(&a), d.weight_length(&d.inverse(&a)));
        for s in 0..3 {
            let l = d.length(&d.mul(&a, &d.gens[s])) as i64 - d.length(&a) as i64;
            prop_assert!(l == 1 || l == -1);
            prop_assert_eq!(l == -1, d.right_descents(&a).contains(&s));
        }
    }

    #[test]
    fn lowest_cell_factorization_round_trips(w1 in 0usize..12, w2 in 0usize..12, x in prop::collection::vec(0i64..4, 2)) {
        let d = g2();
        let z = d.compose(w1, &x, w2);
        let f = d.c0_factorize(&z).expect("composed element lies in the lowest cell");
        prop_assert_eq!((f.w1, f.x.to_vec(), f.w2), (w1, x.clone(), w2));
        let bx = d.box_elements();
        let add = d.length(&bx[w1]) + d.w0_length() + d.length(&d.translation(&x)) + d.length(&bx[w2]);
        prop_assert_eq!(d.length(&z), add);
    }

    #[test]
    fn tensor_products_are_commutative_and_dimension_preserving(kind in prop::sample::select(vec!["A2", "B2", "G2"]),
                                                                x in prop::collection::vec(0i64..3, 2), y in prop::collection::vec(0i64..3, 2)) {
        let rd = RootDatum::new(kind.parse().unwrap()).unwrap();
        let t = rd.tensor_decomposition(&x, &y).unwrap();
        let swapped = rd.tensor_decomposition(&y, &x).unwrap();
        prop_assert_eq!(t.as_ref(), swapped.as_ref());
        let total: i64 = t.iter().map(|(z, m)| m * rd.dim_irrep(z).unwrap()).sum();
        prop_assert_eq!(total, rd.dim_irrep(&x).unwrap() * rd.dim_irrep(&y).unwrap());
        let w = rd.finite_weyl().unwrap();
        let ws = rd.weights(&x).unwrap();
        for u in 0..w.order() as u16 {
            let mut moved: Vec<(Weight, i64)> = ws.iter().map(|(v, m)| (w.act(u, v), *m)).collect();
            moved.sort();
            prop_assert_eq!(&moved, &ws);
        }
    }

    #[test]
    fn center_multiplication_is_commutative_and_star_is_an_automorphism(a in rep(2), b in rep(2), c in rep(2)) {
        let d = &a2_table().datum;
        let ab = clean(rep_mul(d, &a, &b).unwrap());
        prop_assert_eq!(&ab, &clean(rep_mul(d, &b, &a).unwrap()));
        let l = clean(rep_mul(d, &ab, &c).unwrap());
        let r = clean(rep_mul(d, &a, &rep_mul(d, &b, &c).unwrap()).unwrap());
        prop_assert_eq!(l, r);
        prop_assert_eq!(rep_star(d, &rep_star(d, &a)), a.clone());
        prop_assert_eq!(clean(rep_star(d, &ab)), clean(rep_mul(d, &rep_star(d, &a), &rep_star(d, &b)).unwrap()));
    }

    #[test]
    fn prime_field_inverses(p in prop::sample::select(vec![2u64, 3, 5, 7, 101, 2_147_483_647]), a in 1u64..1_000_000) {
        let f = PrimeField::new(p).unwrap();
        let x = f.from_int(&Int::from(a as i64));
        if f.is_zero(&x) {
            prop_assert!(f.inv(&x).is_none());
        } else {
            prop_assert_eq!(f.mul(&x, &f.inv(&x).unwrap()), f.one());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn delta_sets_are_nonempty_antichains(p in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13]), q in 1u64..13) {
        let d = &a2_table().datum;
        let f = PrimeField::new(p).unwrap();
        let s = Specialization::parse(f, &[(q % p).max(1).to_string()]).unwrap();
        let ds = delta_set(d, &s);
        prop_assert!(!ds.is_empty());
        for &i in &ds {
            for &j in &ds {
                prop_assert!(i == j || (i & j != i && i & j != j), "{i:b} and {j:b} are comparable");
            }
        }
    }

    #[test]
    fn spectra_points_are_consistent_over_prime_fields(q in 1u64..7, t1 in 1u64..7, t2 in 1u64..7) {
        let sp = a2_spectra();
        let f = PrimeField::new(7).unwrap();
        let s = Specialization::parse(f, &[q.to_string()]).unwrap();
        let t = TorusPoint::parse(&f, &[t1.to_string(), t2.to_string()]).unwrap();
        let p = sp.point(&s, &t, None).unwrap();
        prop_assert!(p.consistent, "{:?}", p);
        prop_assert_eq!(p.dim, sp.dim_rho(&s, &t).unwrap());
        prop_assert_eq!(p.attached, Some(sp.attached(&s, &t).unwrap()));
    }

    #[test]
    fn spectra_points_are_consistent_over_rationals(q in prop::sample::select(vec!["2", "3", "1/2", "-1", "5/3"]),
                                                   t1 in prop::sample::select(vec!["1", "-1", "2", "1/3", "4"]),
                                                   t2 in prop::sample::select(vec!["1", "-1", "2", "1/3", "4"])) {
        let sp = a2_spectra();
        let f = Rationals;
        let s = Specialization::parse(f, &[q.to_string()]).unwrap();
        let t = TorusPoint::parse(&f, &[t1.to_string(), t2.to_string()]).unwrap();
        let p = sp.point(&s, &t, None).unwrap();
        prop_assert!(p.consistent, "{:?}", p);
        prop_assert_eq!(p.delta_k, Some(vec!["{}".to_string()]));
    }
}
