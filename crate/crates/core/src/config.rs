//! Run configuration: a TOML document naming the affine type, the weight
//! function, the ball radius and the tasks to run.
//!
//! ```toml
//! type = "C2"
//! mode = "extended"
//! radius = 6
//! tasks = ["info", "verify"]
//!
//! [weights]
//! s0 = [2]
//! s1 = [1]
//! s2 = [2]
//!
//! [verify]
//! props = "all"
//! ```

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::affine::{CellDatum, Mode};
use crate::error::{Error, Result};
use crate::gamma::GammaElement;

/// A generator weight: a bare integer when `Γ = ℤ`, otherwise an exponent vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightSpec {
    Scalar(i64),
    Vector(Vec<i64>),
}

impl WeightSpec {
    fn exps(&self) -> Vec<i64> {
        match self {
            WeightSpec::Scalar(k) => vec![*k],
            WeightSpec::Vector(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// `"all"` or a comma separated list such as `"P1,P4,P15"`.
    pub props: Option<String>,
    /// Random sample size; absent means exhaustive.
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub p15_len: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasedRingConfig {
    /// List every checked triple with both γ values.
    pub check_gamma: Option<bool>,
    pub pairs: Option<usize>,
    pub seed: Option<u64>,
    /// Ball radius for the injectivity rank; defaults to half the radius.
    pub injectivity_radius: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectraConfig {
    /// `"Q"` or a prime `p`.
    pub field: Option<String>,
    /// Values of the Γ-coordinate generators, one list per specialization.
    pub q: Option<Vec<Vec<String>>>,
    /// Torus points, coordinates dual to the ω-basis.
    pub torus: Option<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "type")]
    pub affine_type: String,
    #[serde(default = "default_mode")]
    pub mode: String,
    pub gamma_rank: Option<usize>,
    /// `s0 .. sr` to their weights.
    pub weights: BTreeMap<String, WeightSpec>,
    pub radius: u32,
    #[serde(default)]
    pub tasks: Vec<String>,
    pub out: Option<String>,
    pub cache: Option<String>,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub basedring: BasedRingConfig,
    #[serde(default)]
    pub spectra: SpectraConfig,
}

fn default_mode() -> String {
    "extended".into()
}

pub const TASKS: [&str; 6] = ["info", "klbasis", "xi", "verify", "basedring", "spectra"];

impl RunConfig {
    pub fn from_toml(s: &str) -> Result<RunConfig> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &str) -> Result<RunConfig> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {path}: {e}")))?;
        Self::from_toml(&s)
    }

    pub fn parse_mode(&self) -> Result<Mode> {
        match self.mode.as_str() {
            "extended" => Ok(Mode::Extended),
            "non-extended" => Ok(Mode::NonExtended),
            m => Err(Error::Config(format!("mode: expected \"extended\" or \"non-extended\", got {m:?}"))),
        }
    }

    /// `L(s_0), …, L(s_r)` in generator order.
    pub fn weight_vector(&self) -> Result<Vec<GammaElement>> {
        let n = self.weights.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let key = format!("s{i}");
            let w = self
                .weights
                .get(&key)
                .ok_or_else(|| Error::Config(format!("weights.{key}: missing (keys must be s0..s{})", n - 1)))?;
            let e = w.exps();
            if let Some(g) = self.gamma_rank {
                if e.len() != g {
                    return Err(Error::Config(format!("weights.{key}: expected {g} coordinates, got {}", e.len())));
                }
            }
            out.push(GammaElement::new(&e).map_err(|e| Error::Config(format!("weights.{key}: {e}")))?);
        }
        Ok(out)
    }

    /// Builds the datum; rejects weights that are not constant on conjugacy classes.
    pub fn datum(&self) -> Result<Arc<CellDatum>> {
        let t = self.affine_type.parse().map_err(|e| Error::Config(format!("type: {e}")))?;
        Ok(Arc::new(CellDatum::new(t, self.parse_mode()?, self.weight_vector()?)?))
    }

    /// Checks everything that can be checked before a table is built.
    pub fn validate(&self) -> Result<Arc<CellDatum>> {
        for t in &self.tasks {
            if !TASKS.contains(&t.as_str()) {
                return Err(Error::Config(format!("tasks: unknown task {t:?}, expected one of {TASKS:?}")));
            }
        }
        let d = self.datum()?;
        let cell_tasks = ["verify", "basedring", "spectra"];
        let l0 = d.w0_length();
        if self.tasks.iter().any(|t| cell_tasks.contains(&t.as_str())) && self.radius < 2 * l0 {
            return Err(Error::Config(format!("radius: cell tasks need radius >= 2 l(w0) = {}, got {}", 2 * l0, self.radius)));
        }
        if let Some(p) = &self.verify.props {
            crate::cells::parse_props(p)?;
        }
        Ok(d)
    }

    /// Canonical JSON form, the basis of the cache key.
    pub fn canonical(&self) -> String {
        serde_json::to_string(&serde_json::to_value(self).expect("config serializes")).expect("config serializes")
    }
}
