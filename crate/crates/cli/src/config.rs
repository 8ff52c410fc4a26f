//! JSON run configuration.
//!
//! ```json
//! {
//!   "spin": 1.5,
//!   "hamiltonian": { "name": "tr_invariant" },
//!   "coupling": { "name": "sz", "scale": 1.0 },
//!   "gamma": 0.1,
//!   "e_g": 1.0,
//!   "t_max": 200.0,
//!   "integrator": "expm",
//!   "alpha": [0.7071067811865476, 0.0],
//!   "beta": [0.7071067811865476, 0.0]
//! }
//! ```
//!
//! Operators are either `{"name": ...}` or `{"matrix": [[[re, im], ...], ...]}`
//! with an optional `scale`. The Hamiltonian is additionally multiplied by
//! `e_g`.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;

use lsl_core::classify::DEFAULT_SAMPLES;
use lsl_core::linalg::ComplexMatrix;
use lsl_core::lindblad::{Integrator, DEFAULT_HORIZON};
use lsl_core::operators::OperatorSpec;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOperator {
    name: Option<String>,
    matrix: Option<Vec<Vec<[f64; 2]>>>,
    scale: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutputs {
    csv: Option<PathBuf>,
    summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    spin: Option<f64>,
    hamiltonian: RawOperator,
    coupling: RawOperator,
    gamma: Option<f64>,
    e_g: Option<f64>,
    t_max: Option<f64>,
    dt: Option<f64>,
    integrator: Option<String>,
    alpha: Option<[f64; 2]>,
    beta: Option<[f64; 2]>,
    samples: Option<usize>,
    outputs: Option<RawOutputs>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spin: f64,
    pub hamiltonian: OperatorSpec,
    pub coupling: OperatorSpec,
    pub gamma: f64,
    pub e_g: f64,
    /// Propagation time; `None` means `γt = 20`.
    pub t_max: Option<f64>,
    /// RK4 step; `None` means the default step rule.
    pub dt: Option<f64>,
    pub integrator: Integrator,
    pub alpha: Complex64,
    pub beta: Complex64,
    /// Number of output intervals.
    pub samples: usize,
    pub csv: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text)
            .map_err(|e| CliError::Config { line: Some(e.line()), message: strip_position(&e.to_string()) })?;
        let err = |key: &str, message: String| CliError::Config { line: locate(text, key), message };

        let spin = raw.spin.unwrap_or(1.5);
        if !(spin > 0.0 && (2.0 * spin).fract() == 0.0) {
            return Err(err("spin", format!("spin must be a positive multiple of 1/2, got {spin}")));
        }
        let hamiltonian = operator(&raw.hamiltonian).map_err(|m| err("hamiltonian", format!("hamiltonian: {m}")))?;
        let coupling = operator(&raw.coupling).map_err(|m| err("coupling", format!("coupling: {m}")))?;

        let gamma = raw.gamma.unwrap_or(lsl_core::classify::DEFAULT_GAMMA);
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(err("gamma", format!("gamma must be finite and non-negative, got {gamma}")));
        }
        let e_g = raw.e_g.unwrap_or(1.0);
        if !e_g.is_finite() {
            return Err(err("e_g", "e_g must be finite".into()));
        }
        if let Some(t) = raw.t_max {
            if !(t > 0.0 && t.is_finite()) {
                return Err(err("t_max", format!("t_max must be positive, got {t}")));
            }
        }
        if let Some(dt) = raw.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(err("dt", format!("dt must be positive, got {dt}")));
            }
        }
        if raw.t_max.is_none() && gamma == 0.0 {
            return Err(err("t_max", "t_max is required when gamma is 0".into()));
        }
        let integrator = match &raw.integrator {
            None => Integrator::Expm,
            Some(s) => s.parse().map_err(|e: lsl_core::Error| err("integrator", e.to_string()))?,
        };
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let alpha = raw.alpha.map(|[re, im]| Complex64::new(re, im)).unwrap_or(Complex64::new(r, 0.0));
        let beta = raw.beta.map(|[re, im]| Complex64::new(re, im)).unwrap_or(Complex64::new(r, 0.0));
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if !((norm - 1.0).abs() <= 1e-9) {
            let key = if raw.alpha.is_some() { "alpha" } else { "beta" };
            return Err(err(key, format!("|alpha|^2 + |beta|^2 must be 1, got {norm}")));
        }
        let samples = raw.samples.unwrap_or(DEFAULT_SAMPLES);
        if samples == 0 {
            return Err(err("samples", "samples must be at least 1".into()));
        }
        let outputs = raw.outputs.unwrap_or_default();
        Ok(Self {
            spin,
            hamiltonian,
            coupling,
            gamma,
            e_g,
            t_max: raw.t_max,
            dt: raw.dt,
            integrator,
            alpha,
            beta,
            samples,
            csv: outputs.csv,
            summary: outputs.summary,
        })
    }

    /// Propagation time, defaulting to `γt = 20`.
    pub fn t_max(&self) -> f64 {
        self.t_max.unwrap_or(DEFAULT_HORIZON / self.gamma)
    }
}

fn operator(raw: &RawOperator) -> std::result::Result<OperatorSpec, String> {
    let scale = raw.scale.unwrap_or(1.0);
    if !scale.is_finite() {
        return Err("scale must be finite".into());
    }
    let spec = match (&raw.name, &raw.matrix) {
        (Some(name), None) => OperatorSpec::named(name.clone()),
        (None, Some(rows)) => {
            let n = rows.len();
            if n == 0 || rows.iter().any(|r| r.len() != n) {
                return Err("matrix must be square and non-empty".into());
            }
            OperatorSpec::literal(ComplexMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
        }
        _ => return Err("give exactly one of \"name\" or \"matrix\"".into()),
    };
    Ok(spec.with_scale(scale))
}

/// serde_json appends "at line L column C"; the line is reported
/// separately.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(k) => msg[..k].to_string(),
        None => msg.to_string(),
    }
}

/// 1-based line of the first occurrence of `"key"`.
fn locate(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|k| k + 1)
}
