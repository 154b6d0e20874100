//! JSON problem descriptions.
//!
//! ```json
//! {
//!   "D": 1, "d": 1,
//!   "c": [0.0, 1.0],
//!   "kernels": [
//!     {"order": 1, "sigma": 1.0, "a": 1.0,
//!      "oscillations": [{"eps": 0.0, "mu": 0.0, "omega": 0.8}]}
//!   ],
//!   "rhs": "builtin:logistic",
//!   "history": "constant:[1.05]",
//!   "params": {"r": 2.0, "K": 1.0, "sigma": 1.0, "Omega": 0.8, "epsilon": 0.5}
//! }
//! ```
//!
//! `rhs` is either `builtin:<name>` (registry: `logistic`, with `params`)
//! or `linear:<json>` where the embedded JSON object carries square
//! matrices `A` and `B` (`F(x, z) = A x + B z`). `history` is
//! `constant:[...]` or `expr:<id>` (registry: `zero`).

use crate::error::CliError;
use lct_core::kernels::{KernelSpec, Oscillation};
use lct_core::linalg::Matrix;
use lct_core::logistic::LogisticParams;
use lct_core::system::{ConstantHistory, DelaySystemSpec, History, LinearField, VectorField};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    #[serde(rename = "D")]
    pub dim: usize,
    #[serde(rename = "d")]
    pub delayed_dim: usize,
    pub c: Vec<f64>,
    pub kernels: Vec<KernelEntry>,
    pub rhs: String,
    pub history: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Declared reduced dimension; when present it must match the
    /// dimension formula.
    #[serde(default)]
    pub r: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelEntry {
    pub order: usize,
    pub sigma: f64,
    pub a: f64,
    #[serde(default)]
    pub oscillations: Vec<OscEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscEntry {
    pub eps: f64,
    pub mu: f64,
    pub omega: f64,
}

#[derive(Debug, Deserialize)]
struct LinearRhs {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
}

/// A parsed problem: the validated system plus the logistic parameters when
/// the right-hand side is the built-in logistic model.
pub struct LoadedSpec {
    pub spec: DelaySystemSpec,
    pub logistic: Option<LogisticParams>,
}

pub fn load(path: &Path, overrides: &[(String, f64)]) -> Result<LoadedSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    let file: SpecFile = serde_json::from_str(&text)
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    build(file, overrides)
}

pub fn build(mut file: SpecFile, overrides: &[(String, f64)]) -> Result<LoadedSpec, CliError> {
    let file_kernels: Result<Vec<KernelSpec>, _> = file
        .kernels
        .iter()
        .map(|k| {
            KernelSpec::new(
                k.order,
                k.sigma,
                k.a,
                k.oscillations
                    .iter()
                    .map(|o| Oscillation { eps: o.eps, mu: o.mu, omega: o.omega })
                    .collect(),
            )
        })
        .collect();
    let file_kernels = file_kernels?;

    let history = parse_history(&file.history, file.dim)?;

    let (kernels, rhs, logistic): (Vec<KernelSpec>, Arc<dyn VectorField>, Option<LogisticParams>) =
        if let Some(name) = file.rhs.strip_prefix("builtin:") {
            match name {
                "logistic" => {
                    let params = logistic_params_from(&file.params)?;
                    if file.dim != 1 || file.delayed_dim != 1 {
                        return Err(CliError::validation(
                            "builtin:logistic requires D = 1 and d = 1",
                        ));
                    }
                    // The file's kernel list must agree with its own
                    // parameters, which are the single source of truth.
                    validate_logistic_kernels(&file_kernels, &file.c, &params)?;
                    // Overrides rewrite the parameters; the canonical kernel
                    // list is regenerated from the result.
                    for (key, value) in overrides {
                        apply_override(&mut file, key, *value)?;
                    }
                    let params = logistic_params_from(&file.params)?;
                    let reference = params.delay_spec_at_capacity();
                    (reference.kernels().to_vec(), Arc::new(LogisticSurrogate { params }), Some(params))
                }
                other => {
                    return Err(CliError::validation(format!(
                        "unknown builtin right-hand side '{other}' (registry: logistic)"
                    )))
                }
            }
        } else if let Some(json) = file.rhs.strip_prefix("linear:").map(str::to_owned) {
            for (key, value) in overrides {
                apply_override(&mut file, key, *value)?;
            }
            let linear: LinearRhs = serde_json::from_str(&json)
                .map_err(|e| CliError::validation(format!("linear rhs: {e}")))?;
            let a = matrix_from(&linear.a, file.dim, "A")?;
            let b = matrix_from(&linear.b, file.dim, "B")?;
            (file_kernels, Arc::new(LinearField::new(a, b)), None)
        } else {
            return Err(CliError::validation(format!(
                "rhs must be 'builtin:<name>' or 'linear:<json>', got '{}'",
                file.rhs
            )));
        };

    let spec =
        DelaySystemSpec::new(file.dim, file.delayed_dim, kernels, file.c.clone(), rhs, history)?;

    if let Some(declared) = file.r {
        let layout = lct_core::transform::transform(&spec);
        if layout.dim() != declared {
            return Err(CliError::validation(format!(
                "declared r = {declared} but the dimension formula gives {}",
                layout.dim()
            )));
        }
    }
    Ok(LoadedSpec { spec, logistic })
}

/// The logistic right-hand side `F(x, z) = r x (1 - z / K)`.
struct LogisticSurrogate {
    params: LogisticParams,
}

impl VectorField for LogisticSurrogate {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, state: &[f64], delayed: &[f64], out: &mut [f64]) {
        out[0] =
            self.params.growth() * state[0] * (1.0 - delayed[0] / self.params.capacity());
    }
}

fn validate_logistic_kernels(
    kernels: &[KernelSpec],
    weights: &[f64],
    params: &LogisticParams,
) -> Result<(), CliError> {
    let reference = params.delay_spec_at_capacity();
    if kernels.len() != 2 || weights != reference.weights() {
        return Err(CliError::validation(
            "builtin:logistic requires 2 kernels with weights [0, 1]",
        ));
    }
    for (i, (have, want)) in kernels.iter().zip(reference.kernels().iter()).enumerate() {
        let same = have.order() == want.order()
            && (have.sigma() - want.sigma()).abs() <= 1e-12
            && (have.base_weight() - want.base_weight()).abs() <= 1e-12
            && have.oscillations().len() == want.oscillations().len()
            && have
                .oscillations()
                .iter()
                .zip(want.oscillations())
                .all(|(a, b)| {
                    (a.eps - b.eps).abs() <= 1e-12
                        && (a.mu - b.mu).abs() <= 1e-12
                        && (a.omega - b.omega).abs() <= 1e-12
                });
        if !same {
            return Err(CliError::validation(format!(
                "kernel entry {} disagrees with the logistic parameters \
                 (expected order {}, sigma {}, a 1, oscillation [eps, 0, Omega])",
                i + 1,
                i + 1,
                params.sigma()
            )));
        }
    }
    Ok(())
}

fn apply_override(file: &mut SpecFile, key: &str, value: f64) -> Result<(), CliError> {
    if file.params.contains_key(key) {
        file.params.insert(key.to_string(), value);
        return Ok(());
    }
    Err(CliError::validation(format!(
        "unknown override key '{key}' (spec params: {:?})",
        file.params.keys().collect::<Vec<_>>()
    )))
}

pub fn logistic_params_from(params: &BTreeMap<String, f64>) -> Result<LogisticParams, CliError> {
    let get = |key: &str| {
        params
            .get(key)
            .copied()
            .ok_or_else(|| CliError::validation(format!("builtin:logistic needs params.{key}")))
    };
    for key in params.keys() {
        if !matches!(key.as_str(), "r" | "K" | "sigma" | "Omega" | "epsilon") {
            return Err(CliError::validation(format!("unknown logistic parameter '{key}'")));
        }
    }
    Ok(LogisticParams::new(get("r")?, get("K")?, get("sigma")?, get("Omega")?, get("epsilon")?)?)
}

fn matrix_from(rows: &[Vec<f64>], dim: usize, name: &str) -> Result<Matrix, CliError> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(CliError::validation(format!("matrix {name} must be {dim} x {dim}")));
    }
    let mut m = Matrix::zeros(dim);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    Ok(m)
}

pub fn parse_history(text: &str, dim: usize) -> Result<Arc<dyn History>, CliError> {
    if let Some(json) = text.strip_prefix("constant:") {
        let values: Vec<f64> = serde_json::from_str(json)
            .map_err(|e| CliError::validation(format!("history constant: {e}")))?;
        if values.len() != dim {
            return Err(CliError::validation(format!(
                "history has {} entries, system needs {dim}",
                values.len()
            )));
        }
        return Ok(Arc::new(ConstantHistory::new(values)));
    }
    if let Some(id) = text.strip_prefix("expr:") {
        return match id {
            "zero" => Ok(Arc::new(ConstantHistory::new(vec![0.0; dim]))),
            other => Err(CliError::validation(format!(
                "unknown history expression '{other}' (registry: zero)"
            ))),
        };
    }
    Err(CliError::validation(format!(
        "history must be 'constant:[...]' or 'expr:<id>', got '{text}'"
    )))
}
