//! Acceptance harness: one PASS/FAIL line per criterion.
//!
//! Every identity is exact; the tolerance is zero throughout.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use lowcell::based_ring::{gamma_check, phi_check, phi_injectivity_check, product_law_check};
use lowcell::field::{Field, PrimeField, Rationals};
use lowcell::spectra::{grid_scan, Spectra, Specialization, TorusPoint};
use lowcell::xi::{closed_forms, xi_sweep};
use lowcell::{CellContext, CellDatum, GammaElement, KlTable, Laurent, Mode, Property, Sampling, Verdict, VerifyOptions};

/// Exact comparisons only.
const TOLERANCE: i64 = 0;
const SUITE_RADIUS: u32 = 8;
const SAMPLE_TUPLES: usize = 500;
const SAMPLE_SEED: u64 = 20_240_601;
const PHI_PAIRS: usize = 50;
const GRID_MIN_POINTS: usize = 20;

struct Conf {
    label: &'static str,
    datum: Arc<CellDatum>,
    table: KlTable,
}

fn datum(t: &str, mode: Mode, w: &[i64]) -> Arc<CellDatum> {
    let ws = w.iter().map(|&k| GammaElement::new(&[k]).unwrap()).collect();
    Arc::new(CellDatum::new(t.parse().unwrap(), mode, ws).unwrap())
}

fn conf(label: &'static str, t: &str, mode: Mode, w: &[i64], radius: u32) -> Conf {
    let d = datum(t, mode, w);
    let table = KlTable::new(d.clone(), radius).unwrap();
    Conf { label, datum: d, table }
}

struct Confs {
    a1: Conf,
    a2: Conf,
    c2_equal: Conf,
    c2_unequal: Conf,
    c2_nonext: Conf,
    g2: Conf,
}

impl Confs {
    fn build() -> Confs {
        Confs {
            a1: conf("A1~ L=(1,1)", "A1", Mode::Extended, &[1, 1], 16),
            a2: conf("A2~ L=(1,1,1)", "A2", Mode::Extended, &[1, 1, 1], 16),
            c2_equal: conf("C2~ L=(1,1,1)", "C2", Mode::Extended, &[1, 1, 1], 16),
            c2_unequal: conf("C2~ L=(2,1,2)", "C2", Mode::Extended, &[2, 1, 2], 16),
            c2_nonext: conf("C2~' L=(1,1,2)", "C2", Mode::NonExtended, &[1, 1, 2], 20),
            g2: conf("G2~ L=(1,1,3)", "G2", Mode::Extended, &[1, 1, 3], 32),
        }
    }

    fn all(&self) -> [&Conf; 6] {
        [&self.a1, &self.a2, &self.c2_equal, &self.c2_unequal, &self.c2_nonext, &self.g2]
    }
}

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

/// 1. Bar invariance and triangularity of every computed `C_w`, on fresh tables of radius `2 l(w₀) + 2`.
fn kl_defining(c: &Confs) -> Outcome {
    let mut parts = Vec::new();
    for k in c.all() {
        let need = 2 * k.datum.w0_length() + 2;
        let tab = KlTable::new(k.datum.clone(), need).map_err(e)?;
        let n = tab.verify_defining_conditions().map_err(|(w, m)| format!("{}: {} {m}", k.label, k.datum.element_name(&w)))?;
        parts.push(format!("{} r{need} {n}", k.label));
    }
    Ok(parts.join(", "))
}

/// `q_{w₀}^{-1} Σ_{y∈W₀} q_y^2` assembled from lengths alone.
fn h_w0_oracle(k: &Conf) -> Laurent {
    let d = &k.datum;
    let lw0 = d.weight_length(&d.w0);
    let mut acc = Laurent::zero();
    for i in k.table.ball_indices(d.w0_length()) {
        let w = k.table.elem(i);
        if d.trans(&w).iter().all(|&c| c == 0) && d.omega_index(&w) == 0 {
            acc.add_assign(&Laurent::q(d.weight_length(&w).scale(2).sub(&lw0)));
        }
    }
    acc
}

/// 2. Closed forms for `C_{w₀}` and `h_{w₀,w₀,w₀}`, checked against a direct oracle as well.
fn closed(c: &Confs) -> Outcome {
    let mut parts = Vec::new();
    for k in c.all() {
        let cf = closed_forms(&k.table).map_err(e)?;
        ensure(cf.c_w0 && cf.h_w0, || format!("{}: c_w0 {} h_w0 {}", k.label, cf.c_w0, cf.h_w0))?;
        let d = &k.datum;
        let w0 = k.table.require_index(&d.w0, "w0").map_err(e)?;
        // Coefficients on the rescaled basis: q_y q_{w₀}^{-1} on W₀ and nothing else.
        let lw0 = d.weight_length(&d.w0);
        let coeffs = k.table.kl_coeffs(w0);
        ensure(coeffs.len() == d.weyl.order(), || format!("{}: C_w0 support {} != |W0|", k.label, coeffs.len()))?;
        for (y, p) in coeffs {
            let yw = k.table.elem(*y);
            let expect = Laurent::q(d.weight_length(&yw).sub(&lw0));
            ensure(d.trans(&yw).iter().all(|&c| c == 0) && *p == expect, || format!("{}: coefficient at {}", k.label, d.element_name(&yw)))?;
        }
        let h = k.table.h(w0, w0, w0).map_err(e)?;
        let oracle = h_w0_oracle(k);
        ensure(h == oracle && h == cf.h_w0_value, || format!("{}: h_w0 {h} vs oracle {oracle}", k.label))?;
        parts.push(format!("{} h={h}", k.label));
    }
    Ok(parts.join("; "))
}

/// 3. Factored form of the lowest-cell basis elements.
fn xi(c: &Confs) -> Outcome {
    let mut parts = Vec::new();
    for (k, len) in [(&c.a2, 10), (&c.c2_equal, 8), (&c.c2_unequal, 8), (&c.c2_nonext, 8)] {
        let s = xi_sweep(&k.table, len).map_err(e)?;
        ensure(s.nonzero.is_empty(), || format!("{}: nonzero residuals at {:?}", k.label, &s.nonzero[..s.nonzero.len().min(5)]))?;
        ensure(s.checked > 0, || format!("{}: nothing checked", k.label))?;
        parts.push(format!("{} len<={len}: {} zero residuals", k.label, s.checked));
    }
    Ok(parts.join(", "))
}

/// 4. Left cells, distinguished involutions and one involution per cell.
fn census(c: &Confs) -> Outcome {
    let mut parts = Vec::new();
    for k in c.all() {
        let cx = CellContext::new(&k.table);
        let n = k.datum.weyl.order();
        let cells = cx.cell_census(SUITE_RADIUS);
        let dist = cx.distinguished_involutions().map_err(e)?;
        ensure(cells.len() == n, || format!("{}: {} left cells, |W0| = {n}", k.label, cells.len()))?;
        ensure(dist.len() == n, || format!("{}: |D| = {}", k.label, dist.len()))?;
        ensure(dist.iter().all(|x| x.involution && x.delta_is_l_w0), || format!("{}: bad distinguished element", k.label))?;
        let rep = cx.verify(Property::P13, SUITE_RADIUS, &VerifyOptions::default()).map_err(e)?;
        ensure(rep.verdict == Verdict::Pass, || format!("{}: P13 {:?}", k.label, rep.verdict))?;
        parts.push(format!("{} {n} cells", k.label));
    }
    Ok(parts.join(", "))
}

const SUITE: [Property; 10] = [
    Property::P1,
    Property::P2,
    Property::P3,
    Property::P4,
    Property::P5,
    Property::P6,
    Property::P7,
    Property::P8,
    Property::P13,
    Property::P15,
];

fn suite(k: &Conf, props: &[Property], r: u32, sampling: Sampling) -> Outcome {
    let cx = CellContext::new(&k.table);
    let opts = VerifyOptions { sampling, ..VerifyOptions::default() };
    let mut checked = 0;
    for &p in props {
        let rep = cx.verify(p, r, &opts).map_err(|x| format!("{} {}: {x}", k.label, p.name()))?;
        match &rep.verdict {
            Verdict::Pass => checked += rep.checked,
            Verdict::Vacuous => return Err(format!("{} {}: vacuous", k.label, p.name())),
            Verdict::Fail { witness_names, detail, .. } => {
                return Err(format!("{} {}: witness {witness_names:?}: {detail}", k.label, p.name()))
            }
        }
    }
    Ok(format!("{} {checked}", k.label))
}

/// 5. The property suite: exhaustive in type A, sampled otherwise.
fn p_suite(c: &Confs) -> Outcome {
    let random = Sampling::Random { count: SAMPLE_TUPLES, seed: SAMPLE_SEED };
    let mut parts = vec![
        suite(&c.a1, &SUITE, SUITE_RADIUS, Sampling::Exhaustive)?,
        suite(&c.a2, &SUITE, SUITE_RADIUS, Sampling::Exhaustive)?,
    ];
    for k in [&c.c2_equal, &c.c2_unequal] {
        parts.push(suite(k, &SUITE, SUITE_RADIUS, random)?);
    }
    // The lowest cell of G2~ starts at length 6; radius 12 gives it several layers.
    parts.push(suite(&c.g2, &SUITE, 12, random)?);
    Ok(parts.join(", "))
}

/// Peels highest weights off a product of characters; the height is taken in root coordinates.
fn convolution_oracle(d: &CellDatum, x: &[i64], y: &[i64]) -> BTreeMap<Vec<i64>, i64> {
    let mut prod: BTreeMap<Vec<i64>, i64> = BTreeMap::new();
    let (cx, cy) = (d.center_weights(x).unwrap(), d.center_weights(y).unwrap());
    for (a, m) in &cx {
        for (b, n) in &cy {
            let s: Vec<i64> = a.iter().zip(b.iter()).map(|(p, q)| p + q).collect();
            *prod.entry(s).or_insert(0) += m * n;
        }
    }
    let height = |w: &[i64]| -> i64 { d.root.alpha_coords_scaled(w).iter().sum() };
    let mut out = BTreeMap::new();
    loop {
        prod.retain(|_, m| *m != 0);
        let Some(top) = prod.keys().max_by_key(|w| (height(w), (*w).clone())).cloned() else { break };
        let m = prod[&top];
        assert!(m > 0 && d.is_dominant_lattice(&top), "highest term {top:?} is not a dominant weight with positive multiplicity");
        out.insert(top.clone(), m);
        for (w, k) in d.center_weights(&top).unwrap() {
            *prod.entry(w.to_vec()).or_insert(0) -= m * k;
        }
    }
    out
}

/// 6. γ equals the tensor multiplicity on every triple up to length 8 in A2~.
fn gamma_tensor(c: &Confs) -> Outcome {
    let k = &c.a2;
    let cx = CellContext::new(&k.table);
    let g = gamma_check(&cx, SUITE_RADIUS, false).map_err(e)?;
    ensure(g.mismatches.is_empty(), || format!("{} mismatches, first {:?}", g.mismatches.len(), g.mismatches.first()))?;
    ensure(g.route_mismatches == 0, || format!("{} route mismatches", g.route_mismatches))?;
    ensure(g.max_multiplicity >= 2, || format!("max multiplicity {}", g.max_multiplicity))?;
    // Klimyk against character convolution on the weights that occur.
    let d = &k.datum;
    let mut pairs = 0;
    for a in 0..=3i64 {
        for b in 0..=3 - a {
            for p in 0..=3i64 {
                for q in 0..=3 - p {
                    let (x, y) = (vec![a, b], vec![p, q]);
                    let klimyk: BTreeMap<Vec<i64>, i64> =
                        d.center_tensor(&x, &y).unwrap().into_iter().map(|(z, m)| (z.to_vec(), m)).collect();
                    let conv = convolution_oracle(d, &x, &y);
                    ensure(klimyk == conv, || format!("V{x:?} x V{y:?}: Klimyk {klimyk:?} vs convolution {conv:?}"))?;
                    pairs += 1;
                }
            }
        }
    }
    let w = g.max_multiplicity_witness.as_ref().map(|t| format!("{} {} {}", t.u, t.u_prime, t.u_second)).unwrap_or_default();
    Ok(format!(
        "{} triples, {} nonzero, max multiplicity {} at ({w}), {} route pairs, {pairs} tensor products cross-checked",
        g.triples, g.nonzero, g.max_multiplicity, g.route_pairs
    ))
}

/// 7. φ is a unital homomorphism and injective on a ball.
fn phi_hom(c: &Confs) -> Outcome {
    let mut parts = Vec::new();
    for (k, pr, ir) in [(&c.a1, 4, 4), (&c.a2, 3, 4), (&c.c2_equal, 2, 3), (&c.c2_unequal, 2, 3), (&c.c2_nonext, 2, 3), (&c.g2, 1, 2)] {
        let cx = CellContext::new(&k.table);
        let p = phi_check(&cx, pr, PHI_PAIRS, SAMPLE_SEED).map_err(|x| format!("{}: {x}", k.label))?;
        ensure(p.pairs >= PHI_PAIRS, || format!("{}: only {} pairs", k.label, p.pairs))?;
        ensure(p.multiplicative && p.unital && p.failures.is_empty(), || format!("{}: {:?}", k.label, p.failures.first()))?;
        let inj = phi_injectivity_check(&cx, ir, SAMPLE_SEED).map_err(|x| format!("{}: {x}", k.label))?;
        ensure(inj.full_rank, || format!("{}: rank {} of {}", k.label, inj.rank, inj.ball_size))?;
        parts.push(format!("{} {} pairs, rank {}/{}", k.label, p.pairs, inj.rank, inj.ball_size));
    }
    Ok(parts.join(", "))
}

/// 8. Degree bounds for the alcove module and the box products.
fn degree_bounds(c: &Confs) -> Outcome {
    let mut parts = Vec::new();
    for k in c.all() {
        parts.push(suite(k, &[Property::DEG32, Property::DEG33], SUITE_RADIUS, Sampling::Exhaustive)?);
    }
    Ok(parts.join(", "))
}

fn grid_over<F: Field>(f: F, k: &Conf, qs: &[&str], tvals: &[&str]) -> Result<(usize, usize, usize), String> {
    let cx = CellContext::new(&k.table);
    let sp = Spectra::new(&cx).map_err(e)?;
    let d = &k.datum;
    let symbolic = if sp.size() <= 8 { Some(sp.det_element().map_err(e)?) } else { None };
    let specs = qs
        .iter()
        .map(|q| Specialization::parse(f.clone(), &vec![q.to_string(); d.gamma_rank]))
        .collect::<lowcell::Result<Vec<_>>>()
        .map_err(e)?;
    let mut tori = Vec::new();
    for (i, a) in tvals.iter().enumerate() {
        let mut co = vec![a.to_string()];
        for j in 1..d.rank {
            co.push(tvals[(i + 2 * j) % tvals.len()].to_string());
        }
        tori.push(TorusPoint::parse(&f, &co).map_err(e)?);
    }
    let g = grid_scan(&sp, &specs, &tori, symbolic.as_ref()).map_err(e)?;
    if let Some(p) = g.points.iter().find(|p| !p.consistent) {
        return Err(format!("{}: inconsistent point q={:?} t={:?} dim {} det {}", k.label, p.q, p.torus, p.dim, p.det));
    }
    Ok((g.points.len(), g.rank_drops, g.not_attached))
}

/// 9. Attachedness, dimension and the determinant agree on a grid; A1~ drops rank at q = t = 2.
fn spectra_chain(c: &Confs) -> Outcome {
    let mut parts = Vec::new();
    let tq = ["1", "2", "1/2", "-1", "3", "-3/2", "5/7", "4"];
    let tp = ["1", "2", "3", "4", "5", "6"];
    for k in [&c.a1, &c.a2, &c.c2_unequal, &c.c2_nonext, &c.g2] {
        let (nq, dq, _) = grid_over(Rationals, k, &["2", "3", "1/2"], &tq)?;
        let (np, dp, na) = grid_over(PrimeField::new(7).map_err(e)?, k, &["2", "3"], &tp)?;
        ensure(nq + np >= GRID_MIN_POINTS, || format!("{}: {} points", k.label, nq + np))?;
        parts.push(format!("{} {}Q+{}F7 points, {} rank drops, {} unattached", k.label, nq, np, dq + dp, na));
    }
    let cx = CellContext::new(&c.a1.table);
    let sp = Spectra::new(&cx).map_err(e)?;
    let f = Rationals;
    let spec = Specialization::parse(f, &["2".to_string()]).map_err(e)?;
    let t = TorusPoint::parse(&f, &["2".to_string()]).map_err(e)?;
    let det = sp.det_element().map_err(e)?;
    let p = sp.point(&spec, &t, Some(&det)).map_err(e)?;
    ensure(p.det == "0" && !p.phi_iso && p.dim == 1 && p.attached == Some(true) && p.consistent, || format!("A1~ q=2 t=2: {p:?}"))?;
    parts.push("A1~ q=2 t=2: det 0, dim 1 of 2".into());
    Ok(parts.join("; "))
}

/// 10. Non-extended C2~: box size, factorization over the root lattice, product law.
fn nonextended(c: &Confs) -> Outcome {
    let k = &c.c2_nonext;
    let d = &k.datum;
    ensure(d.box_elements().len() == d.weyl.order() && d.weyl.order() == 8, || format!("box size {}", d.box_elements().len()))?;
    let cx = CellContext::new(&k.table);
    let mut n = 0;
    for i in k.table.ball_indices(SUITE_RADIUS) {
        if let Some(f) = cx.factor(i) {
            let z = k.table.elem(i);
            ensure(d.root.in_root_lattice(&f.x) && f.x.iter().all(|&v| v >= 0), || format!("{}: x = {:?}", d.element_name(&z), f.x))?;
            ensure(d.compose(f.w1, &f.x, f.w2) == z, || format!("{}: factorization does not recompose", d.element_name(&z)))?;
            n += 1;
        }
    }
    ensure(n > 0, || "no lowest-cell elements".into())?;
    let law = product_law_check(d, 2, 1).map_err(e)?;
    ensure(law.failures.is_empty(), || format!("product law: {:?}", law.failures.first()))?;
    Ok(format!("box 8, {n} elements factor over Q+, product law on {} pairs", law.pairs))
}

fn main() {
    assert_eq!(TOLERANCE, 0);
    let t0 = Instant::now();
    let confs = Confs::build();
    println!("tables built in {:.1?} ({})", t0.elapsed(), confs.all().map(|k| format!("{} r{} n{}", k.label, k.table.radius, k.table.size())).join(", "));
    let criteria: [(&str, fn(&Confs) -> Outcome); 10] = [
        ("KL defining conditions", kl_defining),
        ("closed forms for C_w0 and h_w0", closed),
        ("factored lowest-cell basis", xi),
        ("left-cell census", census),
        ("property suite", p_suite),
        ("gamma equals tensor multiplicity", gamma_tensor),
        ("phi homomorphism and injectivity", phi_hom),
        ("degree bounds", degree_bounds),
        ("spectra chain", spectra_chain),
        ("non-extended C2~", nonextended),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(|| f(&confs))).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let (tag, detail) = match out {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] {:>2} {name} ({:.1?}): {detail}", i + 1, t.elapsed());
    }
    println!("{} of {} criteria passed in {:.1?}", criteria.len() - failed, criteria.len(), t0.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
