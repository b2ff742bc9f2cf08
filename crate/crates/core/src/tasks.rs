//! Task dispatch for the command line front end, with a content-addressed
//! result cache.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::affine::{CellDatum, Mode};
use crate::based_ring::{gamma_check, phi_check, phi_injectivity_check, product_law_check, Rep};
use crate::cells::{parse_props, suite_table_radius, CellContext, Sampling, VerifyOptions};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::field::{Field, PrimeField, Rationals};
use crate::gamma::Laurent;
use crate::kl::KlTable;
use crate::spectra::{grid_scan, subset_label, subset_of, zeta, Spectra, Specialization, TorusPoint};
use crate::xi::{closed_forms, free_module_check, omega_twist_check, xi_verify};

/// Result of one task: the JSON report and whether every check in it passed.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskOutput {
    pub passed: bool,
    pub value: Value,
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("reports serialize")
}

fn table(d: &std::sync::Arc<CellDatum>, radius: u32) -> Result<KlTable> {
    KlTable::new(d.clone(), radius)
}

fn longest_box(d: &CellDatum) -> u32 {
    d.box_elements().iter().map(|w| d.length(w)).max().unwrap_or(0)
}

pub fn rep_to_json(a: &Rep<Laurent>) -> Value {
    let m: BTreeMap<String, Value> = a
        .iter()
        .map(|(x, c)| {
            let k: Vec<String> = x.iter().map(|v| v.to_string()).collect();
            (format!("({})", k.join(",")), c.to_json_value())
        })
        .collect();
    to_value(&m)
}

pub fn run_task(cfg: &RunConfig, task: &str) -> Result<TaskOutput> {
    let d = cfg.validate()?;
    match task {
        "info" => info(cfg, &d),
        "klbasis" => klbasis(cfg, &d),
        "xi" => xi(cfg, &d),
        "verify" => verify(cfg, &d),
        "basedring" => basedring(cfg, &d),
        "spectra" => spectra(cfg, &d),
        t => Err(Error::Config(format!("unknown task {t:?}"))),
    }
}

fn info(cfg: &RunConfig, d: &std::sync::Arc<CellDatum>) -> Result<TaskOutput> {
    let r = cfg.radius;
    let tab = table(d, r.max(d.w0_length() + 2 * longest_box(d)))?;
    let cx = CellContext::new(&tab);
    let dist = cx.distinguished_involutions()?;
    let cf = closed_forms(&tab)?;
    let bx: Vec<Value> = d
        .box_elements()
        .iter()
        .map(|w| json!({"name": d.element_name(w), "element": d.element_to_json(w), "length": d.length(w)}))
        .collect();
    let om: Vec<Value> = d.omega.iter().map(|w| json!({"name": d.element_name(w), "element": d.element_to_json(w)})).collect();
    let census = cx.cell_census(r);
    let passed = census.len() == d.weyl.order()
        && dist.len() == d.weyl.order()
        && dist.iter().all(|x| x.involution && x.delta_is_l_w0 && x.n_d.as_ref().is_some_and(|n| n.is_one()))
        && cf.c_w0
        && cf.h_w0;
    Ok(TaskOutput {
        passed,
        value: json!({
            "type": d.affine_type.to_string(),
            "mode": d.mode.to_string(),
            "weights": d.weights.iter().map(|w| w.exps().to_vec()).collect::<Vec<_>>(),
            "generator_classes": d.generator_classes(),
            "w0_order": d.weyl.order(),
            "l_w0": d.w0_length(),
            "L_w0": d.weight_length(&d.w0).exps().to_vec(),
            "box": bx,
            "omega": om,
            "distinguished": to_value(&dist),
            "cell_census": {"radius": r, "sizes": census},
            "closed_forms": to_value(&cf),
            "table_radius": tab.radius,
            "table_size": tab.size(),
        }),
    })
}

fn klbasis(cfg: &RunConfig, d: &std::sync::Arc<CellDatum>) -> Result<TaskOutput> {
    let tab = table(d, cfg.radius)?;
    let checked = tab.verify_defining_conditions();
    let mut basis: BTreeMap<String, BTreeMap<String, Value>> = BTreeMap::new();
    for i in 0..tab.size() as u32 {
        let row = tab.kl_coeffs(i).iter().map(|(y, p)| (d.element_name(&tab.elem(*y)), p.to_json_value())).collect();
        basis.insert(d.element_name(&tab.elem(i)), row);
    }
    let (passed, conditions) = match checked {
        Ok(n) => (true, json!({"checked": n, "passed": true})),
        Err((w, msg)) => (false, json!({"passed": false, "element": d.element_name(&w), "detail": msg})),
    };
    Ok(TaskOutput { passed, value: json!({"radius": tab.radius, "defining_conditions": conditions, "basis": basis}) })
}

fn xi(cfg: &RunConfig, d: &std::sync::Arc<CellDatum>) -> Result<TaskOutput> {
    use rayon::prelude::*;
    let tab = table(d, cfg.radius)?;
    let cands: Vec<_> =
        tab.ball_indices(cfg.radius).filter_map(|i| d.c0_factorize(&tab.elem(i)).map(|f| (i, f))).collect();
    let rows: Vec<(String, Value, bool)> = cands
        .par_iter()
        .map(|(i, f)| {
            let res = xi_verify(&tab, f.w1, &f.x, f.w2)?;
            let v = json!({"factored": res.factored.norm().to_string(), "central": res.central.norm().to_string()});
            Ok((d.element_name(&tab.elem(*i)), v, res.is_zero()))
        })
        .collect::<Result<_>>()?;
    let passed_rows = rows.iter().all(|r| r.2);
    let residuals: BTreeMap<String, Value> = rows.into_iter().map(|(n, v, _)| (n, v)).collect();
    let cf = closed_forms(&tab)?;
    let twist = omega_twist_check(&tab)?;
    let free = free_module_check(&tab, cfg.radius)?;
    Ok(TaskOutput {
        passed: passed_rows && cf.c_w0 && cf.h_w0 && cf.c_s && cf.parabolic,
        value: json!({
            "radius": cfg.radius,
            "residuals": residuals,
            "closed_forms": to_value(&cf),
            "omega_twist_pairs": twist,
            "free_module_elements": free,
        }),
    })
}

fn verify_options(cfg: &RunConfig) -> VerifyOptions {
    let v = &cfg.verify;
    VerifyOptions {
        sampling: match v.samples {
            Some(count) => Sampling::Random { count, seed: v.seed.unwrap_or(0) },
            None => Sampling::Exhaustive,
        },
        p15_len: v.p15_len.unwrap_or(1),
    }
}

fn verify(cfg: &RunConfig, d: &std::sync::Arc<CellDatum>) -> Result<TaskOutput> {
    let props = parse_props(cfg.verify.props.as_deref().unwrap_or("all"))?;
    let opts = verify_options(cfg);
    let tab = table(d, suite_table_radius(d, &props, cfg.radius, &opts))?;
    let cx = CellContext::new(&tab);
    let reports = props.iter().map(|&p| cx.verify(p, cfg.radius, &opts)).collect::<Result<Vec<_>>>()?;
    Ok(TaskOutput { passed: reports.iter().all(|r| r.passed()), value: to_value(&reports) })
}

fn basedring(cfg: &RunConfig, d: &std::sync::Arc<CellDatum>) -> Result<TaskOutput> {
    let b = &cfg.basedring;
    let r = cfg.radius;
    // Longest distinguished involution; φ(C_w) needs products C_w C_d.
    let top_d = d.w0_length() + 2 * longest_box(d);
    let tab = table(d, (2 * r).max(top_d + r))?;
    let cx = CellContext::new(&tab);
    let g = gamma_check(&cx, r, b.check_gamma.unwrap_or(false))?;
    let phi_r = ((tab.radius - top_d) / 2).min(r);
    let ph = phi_check(&cx, phi_r, b.pairs.unwrap_or(50), b.seed.unwrap_or(0))?;
    let inj_r = match b.injectivity_radius {
        Some(n) if n + top_d > tab.radius => {
            return Err(Error::Truncation { what: "injectivity ball".into(), needed: (n + top_d) as usize, have: tab.radius as usize })
        }
        Some(n) => n,
        None => (r / 2).min(tab.radius - top_d),
    };
    let inj = phi_injectivity_check(&cx, inj_r, b.seed.unwrap_or(0))?;
    let law = if d.mode == Mode::NonExtended { Some(product_law_check(d, 2, 1)?) } else { None };
    let passed = g.passed() && ph.passed() && inj.full_rank && law.as_ref().is_none_or(|l| l.failures.is_empty());
    Ok(TaskOutput {
        passed,
        value: json!({
            "gamma": to_value(&g),
            "phi": to_value(&ph),
            "phi_radius": phi_r,
            "injectivity": to_value(&inj),
            "product_law": law.as_ref().map(to_value),
        }),
    })
}

/// `{2, 3, 1/2}` for every Γ-coordinate, and torus coordinates from `{1, 2, 1/2, -1, 3}`.
fn default_grid(d: &CellDatum) -> (Vec<Vec<String>>, Vec<Vec<String>>) {
    let qs = ["2", "3", "1/2"].iter().map(|q| vec![q.to_string(); d.gamma_rank]).collect();
    let vals = ["1", "2", "1/2", "-1", "3"];
    let mut tori: Vec<Vec<String>> = vec![vec![]];
    for _ in 0..d.rank {
        tori = tori.into_iter().flat_map(|t| vals.iter().map(move |v| [t.clone(), vec![v.to_string()]].concat())).collect();
    }
    (qs, tori)
}

fn spectra(cfg: &RunConfig, d: &std::sync::Arc<CellDatum>) -> Result<TaskOutput> {
    let tab = table(d, cfg.radius.max(Spectra::required_radius(d)))?;
    let cx = CellContext::new(&tab);
    let sp = Spectra::new(&cx)?;
    let s = &cfg.spectra;
    let (dq, dt) = default_grid(d);
    let qs = s.q.clone().unwrap_or(dq);
    let tori = s.torus.clone().unwrap_or(dt);
    let symbolic = if sp.size() <= 8 { Some(sp.det_element()?) } else { None };
    match s.field.as_deref().unwrap_or("Q") {
        "Q" | "q" => spectra_over(&sp, Rationals, &qs, &tori, symbolic.as_ref()),
        p => {
            let p: u64 = p.parse().map_err(|_| Error::Config(format!("spectra.field: expected \"Q\" or a prime, got {p:?}")))?;
            spectra_over(&sp, PrimeField::new(p)?, &qs, &tori, symbolic.as_ref())
        }
    }
}

fn spectra_over<F: Field>(
    sp: &Spectra,
    f: F,
    qs: &[Vec<String>],
    tori: &[Vec<String>],
    symbolic: Option<&Rep<Laurent>>,
) -> Result<TaskOutput> {
    let d = sp.datum();
    let specs = qs.iter().map(|q| Specialization::parse(f.clone(), q)).collect::<Result<Vec<_>>>()?;
    let pts = tori.iter().map(|t| TorusPoint::parse(&f, t)).collect::<Result<Vec<_>>>()?;
    let g = grid_scan(sp, &specs, &pts, symbolic)?;
    let mut alpha = BTreeMap::new();
    for &m in sp.alpha_index.keys() {
        alpha.insert(subset_label(&subset_of(m, d.rank)), rep_to_json(sp.alpha(m)?));
    }
    let m: Vec<Vec<Value>> = sp.m.iter().map(|row| row.iter().map(rep_to_json).collect()).collect();
    let zetas: Vec<BTreeMap<String, String>> = specs
        .iter()
        .map(|s| (0u32..1 << d.rank).map(|k| (subset_label(&subset_of(k, d.rank)), f.render(&zeta(d, &subset_of(k, d.rank), s)))).collect())
        .collect();
    let symbolic_json = symbolic.map(rep_to_json);
    let passed = g.inconsistent == 0;
    let value = if g.points.len() == 1 {
        let p = &g.points[0];
        json!({
            "field": p.field, "q": p.q, "torus": p.torus,
            "alpha": p.alpha, "delta_k": p.delta_k, "attached": p.attached,
            "row_criterion": p.row_criterion, "dim": p.dim, "box_size": p.box_size,
            "det": p.det, "phi_iso": p.phi_iso, "det_routes_agree": p.det_routes_agree,
            "consistent": p.consistent, "zeta": zetas[0],
            "alpha_symbolic": alpha, "m_matrix": m, "det_symbolic": symbolic_json,
        })
    } else {
        json!({
            "points": to_value(&g.points),
            "inconsistent": g.inconsistent,
            "rank_drops": g.rank_drops,
            "not_attached": g.not_attached,
            "zeta": zetas,
            "alpha_symbolic": alpha,
            "m_matrix": m,
            "det_symbolic": symbolic_json,
        })
    };
    Ok(TaskOutput { passed, value })
}

/// Cache key: hash of the canonical configuration, the task and the crate version.
pub fn cache_key(cfg: &RunConfig, task: &str) -> String {
    let mut h = Sha256::new();
    h.update(cfg.canonical().as_bytes());
    h.update(b"\n");
    h.update(task.as_bytes());
    h.update(b"\n");
    h.update(env!("CARGO_PKG_VERSION").as_bytes());
    hex::encode(h.finalize())
}

/// `run_task`, reading and writing `<cache>/<key>.json` when a cache directory is given.
pub fn run_cached(cfg: &RunConfig, task: &str, cache: Option<&Path>) -> Result<(TaskOutput, bool)> {
    let Some(dir) = cache else { return Ok((run_task(cfg, task)?, false)) };
    let path = dir.join(format!("{}.json", cache_key(cfg, task)));
    if let Ok(s) = std::fs::read_to_string(&path) {
        if let Ok(v) = serde_json::from_str::<Value>(&s) {
            if let (Some(p), Some(val)) = (v.get("passed").and_then(Value::as_bool), v.get("result")) {
                return Ok((TaskOutput { passed: p, value: val.clone() }, true));
            }
        }
    }
    let out = run_task(cfg, task)?;
    std::fs::create_dir_all(dir)?;
    let blob = json!({"passed": out.passed, "result": out.value});
    std::fs::write(&path, serde_json::to_string(&blob).expect("serializes"))?;
    Ok((out, false))
}
