//! Frozen values. Each was first confirmed by an independent route in
//! `oracles.rs` or the acceptance harness, then pinned here.

use std::sync::Arc;

use lowcell::based_ring::{gamma_check, phi_injectivity_check, product_law_check, Rep};
use lowcell::field::Rationals;
use lowcell::root::Weight;
use lowcell::spectra::{Spectra, Specialization, TorusPoint};
use lowcell::xi::xi_sweep;
use lowcell::{CellContext, CellDatum, GammaElement, Int, KlTable, Laurent, Mode};

fn datum(t: &str, mode: Mode, w: &[i64]) -> Arc<CellDatum> {
    let ws = w.iter().map(|&k| GammaElement::new(&[k]).unwrap()).collect();
    Arc::new(CellDatum::new(t.parse().unwrap(), mode, ws).unwrap())
}

fn lp(terms: &[(i64, i64)]) -> Laurent {
    Laurent::from_terms(1, terms.iter().map(|&(e, c)| (GammaElement::new(&[e]).unwrap(), Int::from(c))))
}

#[test]
fn table_sizes() {
    for (t, mode, w, r, n) in [
        ("A1", Mode::Extended, vec![1, 1], 16, 66),
        ("A2", Mode::Extended, vec![1, 1, 1], 16, 1227),
        ("C2", Mode::Extended, vec![2, 1, 2], 16, 728),
        ("C2", Mode::NonExtended, vec![1, 1, 2], 20, 561),
        ("G2", Mode::Extended, vec![1, 1, 3], 14, 253),
    ] {
        assert_eq!(KlTable::new(datum(t, mode, &w), r).unwrap().size(), n, "{t} {mode} r{r}");
    }
}

#[test]
fn h_w0_values() {
    for (t, mode, w, terms) in [
        ("A2", Mode::Extended, vec![1, 1, 1], vec![(3, 1), (1, 2), (-1, 2), (-3, 1)]),
        ("C2", Mode::Extended, vec![2, 1, 2], vec![(6, 1), (4, 1), (2, 1), (0, 2), (-2, 1), (-4, 1), (-6, 1)]),
        ("G2", Mode::Extended, vec![1, 1, 3], vec![(12, 1), (10, 1), (6, 1), (4, 2), (2, 1), (-2, 1), (-4, 2), (-6, 1), (-10, 1), (-12, 1)]),
    ] {
        let d = datum(t, mode, &w);
        let tab = KlTable::new(d.clone(), d.w0_length()).unwrap();
        let i = tab.require_index(&d.w0, "w0").unwrap();
        assert_eq!(tab.h(i, i, i).unwrap(), lp(&terms), "{t}");
    }
}

#[test]
fn a1_kl_basis_element() {
    let d = datum("A1", Mode::Extended, &[1, 1]);
    let tab = KlTable::new(d.clone(), 4).unwrap();
    let w = d.from_word(0, &[1, 0]).unwrap();
    let i = tab.require_index(&w, "s1s0").unwrap();
    let got: Vec<(String, Laurent)> = tab.kl_coeffs(i).iter().map(|(y, p)| (d.element_name(&tab.elem(*y)), p.clone())).collect();
    let mut got = got;
    got.sort_by(|a, b| a.0.cmp(&b.0));
    assert_eq!(got, vec![("e".into(), lp(&[(-2, 1)])), ("s0".into(), lp(&[(-1, 1)])), ("s1".into(), lp(&[(-1, 1)])), ("s1s0".into(), lp(&[(0, 1)]))]);
}

#[test]
fn a1_symbolic_determinant() {
    let d = datum("A1", Mode::Extended, &[1, 1]);
    let tab = KlTable::new(d.clone(), Spectra::required_radius(&d)).unwrap();
    let cx = CellContext::new(&tab);
    let sp = Spectra::new(&cx).unwrap();
    let mut det = sp.det_element().unwrap();
    det.retain(|_, c| !c.is_zero());
    let expect: Rep<Laurent> = [
        (Weight::from_slice(&[0]), lp(&[(2, 1), (0, 1), (-2, 1)])),
        (Weight::from_slice(&[2]), lp(&[(0, -1)])),
    ]
    .into_iter()
    .collect();
    assert_eq!(det, expect);
}

#[test]
fn a2_spectra_point() {
    let d = datum("A2", Mode::Extended, &[1, 1, 1]);
    let tab = KlTable::new(d.clone(), Spectra::required_radius(&d)).unwrap();
    let cx = CellContext::new(&tab);
    let sp = Spectra::new(&cx).unwrap();
    let f = Rationals;
    let s = Specialization::parse(f, &["2".to_string()]).unwrap();
    let t = TorusPoint::parse(&f, &["3".to_string(), "1/2".to_string()]).unwrap();
    let p = sp.point(&s, &t, None).unwrap();
    assert_eq!(p.dim, 6);
    assert_eq!(p.det, "199151125894984375/17414258688");
    assert_eq!(p.attached, Some(true));
    assert!(p.phi_iso);
}

#[test]
fn a2_gamma_census() {
    let d = datum("A2", Mode::Extended, &[1, 1, 1]);
    let tab = KlTable::new(d, 16).unwrap();
    let cx = CellContext::new(&tab);
    let g = gamma_check(&cx, 8, false).unwrap();
    assert_eq!((g.triples, g.nonzero, g.max_multiplicity), (6_751_269, 7695, 2));
    assert_eq!(g.route_pairs, 35_721);
    assert!(g.mismatches.is_empty());
    let inj = phi_injectivity_check(&cx, 4, 1).unwrap();
    assert_eq!((inj.ball_size, inj.rank), (93, 93));
}

#[test]
fn xi_sweep_counts() {
    for (t, mode, w, r, len, n) in [
        ("A2", Mode::Extended, vec![1, 1, 1], 10, 10, 324),
        ("C2", Mode::Extended, vec![2, 1, 2], 8, 8, 68),
        ("C2", Mode::NonExtended, vec![1, 1, 2], 8, 8, 20),
    ] {
        let tab = KlTable::new(datum(t, mode, &w), r).unwrap();
        let s = xi_sweep(&tab, len).unwrap();
        assert_eq!((s.checked, s.nonzero.len()), (n, 0), "{t} {mode}");
    }
}

#[test]
fn nonextended_product_law() {
    let d = datum("C2", Mode::NonExtended, &[1, 1, 2]);
    assert_eq!(d.box_elements().len(), 8);
    let law = product_law_check(&d, 2, 1).unwrap();
    assert_eq!((law.pairs, law.failures.len()), (65_536, 0));
}
