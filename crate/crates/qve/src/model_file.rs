//! Model JSON files and the `--ensemble` shorthand.
//!
//! A model file either spells out the discretization
//!
//! ```json
//! {"n": 3, "weights": [1, 1, 1], "a": [0, 0, 0], "s": [[1, 1, 0], [1, 1, 1], [0, 1, 1]]}
//! ```
//!
//! or names one of the example kernels:
//!
//! ```json
//! {"n": 504, "kernel": {"type": "block", "alpha": 3, "delta_factor": 1}}
//! ```

use std::path::Path;

use anyhow::Context;
use qve_core::ensembles::{
    block_model, delta_critical, deformed_wigner_model, translation_invariant_model, two_point_profile, BlockParams,
};
use qve_core::model::QveModel;
use serde::{Deserialize, Serialize};

use crate::UsageError;

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    /// `s = value` everywhere; `value = 1` with `a = 0` is the semicircle.
    Constant {
        #[serde(default = "one")]
        value: f64,
    },
    /// Two-block profile. `gamma` defaults to `1 / alpha`; the block size is
    /// either `delta` or `delta_factor * delta_c(alpha)`.
    Block {
        alpha: f64,
        #[serde(default = "one")]
        beta: f64,
        gamma: Option<f64>,
        delta: Option<f64>,
        delta_factor: Option<f64>,
    },
    /// `s = lambda`; the field comes from `a` or from `two_point`.
    Deformed {
        #[serde(default = "one")]
        lambda: f64,
        two_point: Option<f64>,
    },
    /// Fourier-sampled kernel from `(p, q, cov)` triples.
    TranslationInvariant { cov: Vec<(i64, i64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
}

fn bad(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn invalid(e: qve_core::Error) -> anyhow::Error {
    bad(format!("invalid model: {e}"))
}

impl ModelFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
    }

    /// Parses `name[:key=value,...]`, e.g. `block:alpha=3,gamma=1/3,delta=0.25`.
    /// `semicircle` is an alias for the unit constant kernel. Values may be
    /// written as fractions `p/q`.
    pub fn from_shorthand(spec: &str, n: usize) -> anyhow::Result<Self> {
        let (name, params) = match spec.split_once(':') {
            Some((name, params)) => (name.trim(), params),
            None => (spec.trim(), ""),
        };
        let name = match name {
            "semicircle" => "constant",
            other => other,
        };
        let mut obj = serde_json::Map::new();
        obj.insert("type".into(), name.replace('-', "_").into());
        for item in params.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| bad(format!("ensemble parameter '{item}' is not key=value")))?;
            let key = key.trim();
            if key == "cov" {
                return Err(bad("covariances can only be given in a model file"));
            }
            let value = parse_number(value.trim())
                .ok_or_else(|| bad(format!("ensemble parameter '{key}' has non-numeric value '{value}'")))?;
            obj.insert(key.into(), value.into());
        }
        let kernel: KernelSpec = serde_json::from_value(obj.into())
            .map_err(|e| bad(format!("ensemble '{spec}': {e}")))?;
        Ok(ModelFile { n, weights: None, a: None, s: None, kernel: Some(kernel) })
    }

    pub fn build(&self) -> anyhow::Result<QveModel> {
        let n = self.n;
        if n == 0 {
            return Err(bad("model needs n >= 1"));
        }
        let check_len = |what: &str, len: usize| {
            if len != n {
                Err(bad(format!("'{what}' has {len} entries, expected n = {n}")))
            } else {
                Ok(())
            }
        };
        if let Some(w) = &self.weights {
            check_len("weights", w.len())?;
        }
        if let Some(a) = &self.a {
            check_len("a", a.len())?;
        }
        let weights = || self.weights.clone().unwrap_or_else(|| vec![1.0; n]);
        let field = || self.a.clone().unwrap_or_else(|| vec![0.0; n]);
        let Some(kernel) = &self.kernel else {
            let rows = self.s.as_ref().ok_or_else(|| bad("model needs either 's' or 'kernel'"))?;
            check_len("s", rows.len())?;
            let mut s = Vec::with_capacity(n * n);
            for (i, row) in rows.iter().enumerate() {
                check_len(&format!("s[{i}]"), row.len())?;
                s.extend_from_slice(row);
            }
            return QveModel::new(weights(), field(), s).map_err(invalid);
        };
        if self.s.is_some() {
            return Err(bad("'s' and 'kernel' are mutually exclusive"));
        }
        let fixed = |what: &str| -> anyhow::Result<()> {
            if self.weights.is_some() || self.a.is_some() {
                Err(bad(format!("the {what} kernel fixes weights and a")))
            } else {
                Ok(())
            }
        };
        match kernel {
            KernelSpec::Constant { value } => {
                QveModel::new(weights(), field(), vec![*value; n * n]).map_err(invalid)
            }
            KernelSpec::Block { alpha, beta, gamma, delta, delta_factor } => {
                fixed("block")?;
                let delta = match (delta, delta_factor) {
                    (Some(d), None) => *d,
                    (None, Some(f)) => f * delta_critical(*alpha).map_err(invalid)?,
                    _ => return Err(bad("block kernel needs exactly one of 'delta' and 'delta_factor'")),
                };
                let params =
                    BlockParams::new(*alpha, *beta, gamma.unwrap_or(1.0 / alpha), delta).map_err(invalid)?;
                block_model(params, n).map_err(invalid)
            }
            KernelSpec::Deformed { lambda, two_point } => {
                if self.weights.is_some() {
                    return Err(bad("the deformed kernel uses uniform weights"));
                }
                let a = match (&self.a, two_point) {
                    (Some(a), None) => a.clone(),
                    (None, Some(a0)) => two_point_profile(*a0, n),
                    (None, None) => vec![0.0; n],
                    (Some(_), Some(_)) => return Err(bad("'a' and 'two_point' are mutually exclusive")),
                };
                deformed_wigner_model(*lambda, a, n).map_err(invalid)
            }
            KernelSpec::TranslationInvariant { cov } => {
                fixed("translation_invariant")?;
                let cov: Vec<_> = cov.iter().map(|&(p, q, c)| ((p, q), c)).collect();
                let ti = translation_invariant_model(&cov, n).map_err(invalid)?;
                if ti.clamped > 0 {
                    log::info!("clamped {} slightly negative kernel entries to zero", ti.clamped);
                }
                Ok(ti.model)
            }
        }
    }
}

/// A decimal number or a fraction `p/q`.
pub fn parse_number(s: &str) -> Option<f64> {
    let v = match s.split_once('/') {
        Some((p, q)) => p.trim().parse::<f64>().ok()? / q.trim().parse::<f64>().ok()?,
        None => s.parse::<f64>().ok()?,
    };
    v.is_finite().then_some(v)
}
