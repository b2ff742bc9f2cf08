//! Python bindings. Reports cross the boundary as plain dicts and lists.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

use lowcell::affine::{AffineElement, CellDatum, Mode};
use lowcell::cells::{parse_props, suite_table_radius, CellContext, Sampling, VerifyOptions};
use lowcell::config::RunConfig;
use lowcell::gamma::GammaElement;
use lowcell::kl::KlTable;
use lowcell::root::RootDatum as CoreRoot;
use lowcell::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::Parse(_) | Error::DatumMismatch(_) | Error::Domain(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(u)) => u.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(a) => {
            let l = PyList::empty(py);
            for x in a {
                l.append(to_py(py, x)?)?;
            }
            l.into_any()
        }
        Value::Object(m) => {
            let d = PyDict::new(py);
            for (k, x) in m {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

/// A run configuration, as accepted by the command line tool.
#[pyclass(module = "lowcell_py", skip_from_py_object)]
#[derive(Clone)]
struct Config {
    inner: RunConfig,
}

#[pymethods]
impl Config {
    #[new]
    fn new(toml: &str) -> PyResult<Self> {
        Ok(Config { inner: RunConfig::from_toml(toml).map_err(err)? })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        Ok(Config { inner: RunConfig::from_file(path).map_err(err)? })
    }

    #[getter]
    fn radius(&self) -> u32 {
        self.inner.radius
    }

    #[setter]
    fn set_radius(&mut self, r: u32) {
        self.inner.radius = r;
    }

    #[getter]
    fn tasks(&self) -> Vec<String> {
        self.inner.tasks.clone()
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map(|_| ()).map_err(err)
    }

    /// Runs one task; returns `(passed, report)`.
    fn run<'py>(&self, py: Python<'py>, task: &str) -> PyResult<(bool, Bound<'py, PyAny>)> {
        let cfg = self.inner.clone();
        let t = task.to_string();
        let out = py.detach(move || lowcell::tasks::run_task(&cfg, &t)).map_err(err)?;
        Ok((out.passed, to_py(py, &out.value)?))
    }

    fn __repr__(&self) -> String {
        format!("Config({} {}, radius {})", self.inner.affine_type, self.inner.mode, self.inner.radius)
    }
}

fn weights_from(ws: Vec<Vec<i64>>) -> PyResult<Vec<GammaElement>> {
    ws.iter().map(|w| GammaElement::new(w).map_err(err)).collect()
}

/// Affine Weyl group of a given type with a weight function on its generators.
#[pyclass(module = "lowcell_py", frozen)]
struct Datum {
    inner: Arc<CellDatum>,
}

impl Datum {
    fn elem(&self, omega: usize, word: Vec<usize>) -> PyResult<AffineElement> {
        self.inner.from_word(omega, &word).map_err(err)
    }
}

#[pymethods]
impl Datum {
    /// `weights[i]` is `L(s_i)` as an exponent vector over Γ.
    #[new]
    #[pyo3(signature = (affine_type, weights, mode = "extended"))]
    fn new(affine_type: &str, weights: Vec<Vec<i64>>, mode: &str) -> PyResult<Self> {
        let t = affine_type.parse().map_err(|e: Error| err(e))?;
        let m = match mode {
            "extended" => Mode::Extended,
            "non-extended" => Mode::NonExtended,
            _ => return Err(PyValueError::new_err(format!("mode must be \"extended\" or \"non-extended\", got {mode:?}"))),
        };
        Ok(Datum { inner: Arc::new(CellDatum::new(t, m, weights_from(weights)?).map_err(err)?) })
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank
    }

    #[getter]
    fn w0_order(&self) -> usize {
        self.inner.weyl.order()
    }

    #[getter]
    fn l_w0(&self) -> u32 {
        self.inner.w0_length()
    }

    fn box_names(&self) -> Vec<String> {
        self.inner.box_elements().iter().map(|w| self.inner.element_name(w)).collect()
    }

    /// Reduced name of `ω_omega · s_{word[0]} ⋯`.
    #[pyo3(signature = (word, omega = 0))]
    fn name(&self, word: Vec<usize>, omega: usize) -> PyResult<String> {
        Ok(self.inner.element_name(&self.elem(omega, word)?))
    }

    #[pyo3(signature = (word, omega = 0))]
    fn length(&self, word: Vec<usize>, omega: usize) -> PyResult<u32> {
        Ok(self.inner.length(&self.elem(omega, word)?))
    }

    /// `(w1, x, w2)` names and dominant weight when the element lies in the lowest cell.
    #[pyo3(signature = (word, omega = 0))]
    fn factorize(&self, word: Vec<usize>, omega: usize) -> PyResult<Option<(String, Vec<i64>, String)>> {
        let d = &self.inner;
        let z = self.elem(omega, word)?;
        Ok(d.c0_factorize(&z).map(|f| {
            let b = d.box_elements();
            (d.element_name(&b[f.w1]), f.x.to_vec(), d.element_name(&b[f.w2]))
        }))
    }

    /// Multiplicity of `V(z)` in `V(x) ⊗ V(y)` for the center datum.
    fn center_multiplicity(&self, x: Vec<i64>, y: Vec<i64>, z: Vec<i64>) -> PyResult<i64> {
        self.inner.center_multiplicity(&x, &y, &z).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Datum({} {})", self.inner.affine_type, self.inner.mode)
    }
}

/// Generalized Kazhdan–Lusztig basis on a ball of the given radius.
#[pyclass(module = "lowcell_py", frozen)]
struct Table {
    datum: Arc<CellDatum>,
    inner: KlTable,
}

impl Table {
    fn index(&self, spec: (usize, Vec<usize>)) -> PyResult<u32> {
        let w = self.datum.from_word(spec.0, &spec.1).map_err(err)?;
        self.inner.require_index(&w, "element").map_err(err)
    }

    fn elem(&self, spec: (usize, Vec<usize>)) -> PyResult<AffineElement> {
        self.datum.from_word(spec.0, &spec.1).map_err(err)
    }
}

#[pymethods]
impl Table {
    #[new]
    fn new(py: Python<'_>, datum: &Datum, radius: u32) -> PyResult<Self> {
        let d = datum.inner.clone();
        let inner = py.detach(|| KlTable::new(d.clone(), radius)).map_err(err)?;
        Ok(Table { datum: d, inner })
    }

    #[getter]
    fn radius(&self) -> u32 {
        self.inner.radius
    }

    fn __len__(&self) -> usize {
        self.inner.size()
    }

    /// `C_w` in the T-basis as `[(name, coefficient)]`. Elements are `(omega, word)`.
    fn basis(&self, w: (usize, Vec<usize>)) -> PyResult<Vec<(String, String)>> {
        let i = self.index(w)?;
        Ok(self.inner.kl_coeffs(i).iter().map(|(y, p)| (self.datum.element_name(&self.inner.elem(*y)), p.to_string())).collect())
    }

    /// Structure constant `h_{x,y,z}` of the C-basis.
    fn h(&self, x: (usize, Vec<usize>), y: (usize, Vec<usize>), z: (usize, Vec<usize>)) -> PyResult<String> {
        Ok(self.inner.h(self.index(x)?, self.index(y)?, self.index(z)?).map_err(err)?.to_string())
    }

    /// Number of elements whose defining conditions were checked.
    fn verify_defining_conditions(&self) -> PyResult<usize> {
        self.inner.verify_defining_conditions().map_err(|(w, m)| PyRuntimeError::new_err(format!("{}: {m}", self.datum.element_name(&w))))
    }

    /// `γ_{x,y,z}` by the structure-constant route and by the translation route.
    fn gamma(&self, py: Python<'_>, x: (usize, Vec<usize>), y: (usize, Vec<usize>), z: (usize, Vec<usize>)) -> PyResult<(String, String)> {
        let (x, y, z) = (self.elem(x)?, self.elem(y)?, self.elem(z)?);
        py.detach(|| {
            let cx = CellContext::new(&self.inner);
            let g = cx.gamma_const(&x, &y, &z)?;
            Ok((g.to_string(), cx.gamma_tau(&x, &y, &z).to_string()))
        })
        .map_err(err)
    }

    /// Cell property checks on `ball(radius)`; one report dict per property.
    #[pyo3(signature = (props = "all", radius = None, samples = None, seed = 0, p15_len = 1))]
    fn verify<'py>(
        &self,
        py: Python<'py>,
        props: &str,
        radius: Option<u32>,
        samples: Option<usize>,
        seed: u64,
        p15_len: u32,
    ) -> PyResult<Bound<'py, PyAny>> {
        let ps = parse_props(props).map_err(err)?;
        let sampling = match samples {
            Some(count) => Sampling::Random { count, seed },
            None => Sampling::Exhaustive,
        };
        let opts = VerifyOptions { sampling, p15_len };
        let r = radius.unwrap_or(self.inner.radius / 2);
        let need = suite_table_radius(&self.datum, &ps, r, &opts);
        if need > self.inner.radius {
            return Err(err(Error::Truncation { what: "verify".into(), needed: need as usize, have: self.inner.radius as usize }));
        }
        let reports = py
            .detach(|| {
                let cx = CellContext::new(&self.inner);
                ps.iter().map(|p| cx.verify(*p, r, &opts)).collect::<lowcell::Result<Vec<_>>>()
            })
            .map_err(err)?;
        to_py(py, &serde_json::to_value(&reports).expect("reports serialize"))
    }
}

/// Finite root datum of the given Cartan type; weights on the fundamental-weight basis.
#[pyclass(module = "lowcell_py", frozen)]
struct RootDatum {
    inner: CoreRoot,
}

#[pymethods]
impl RootDatum {
    #[new]
    fn new(kind: &str) -> PyResult<Self> {
        let t = kind.parse().map_err(|e: Error| err(e))?;
        Ok(RootDatum { inner: CoreRoot::new(t).map_err(err)? })
    }

    fn dim(&self, x: Vec<i64>) -> PyResult<i64> {
        self.inner.dim_irrep(&x).map_err(err)
    }

    /// Multiplicity of the weight `mu` in `V(x)`.
    fn weight_multiplicity(&self, mu: Vec<i64>, x: Vec<i64>) -> PyResult<i64> {
        self.inner.weight_multiplicity(&mu, &x).map_err(err)
    }

    fn tensor_multiplicity(&self, x: Vec<i64>, y: Vec<i64>, z: Vec<i64>) -> PyResult<i64> {
        self.inner.tensor_multiplicity(&x, &y, &z).map_err(err)
    }

    /// `V(x) ⊗ V(y)` as `[(z, multiplicity)]`.
    fn tensor(&self, x: Vec<i64>, y: Vec<i64>) -> PyResult<Vec<(Vec<i64>, i64)>> {
        Ok(self.inner.tensor_decomposition(&x, &y).map_err(err)?.iter().map(|(z, m)| (z.to_vec(), *m)).collect())
    }
}

#[pymodule]
fn lowcell_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Config>()?;
    m.add_class::<Datum>()?;
    m.add_class::<Table>()?;
    m.add_class::<RootDatum>()?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
