//! Entropy, purity and coherence verdicts on subspace densities.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{c, ComplexMatrix};
use crate::lindblad::Trajectory;
use crate::spectra::{clamp_spectrum, eigh, normalize_subspace, subspace_density, Subspace, SubspaceDensity};

/// Unit trace is required to this accuracy before an entropy is taken.
pub const TRACE_TOL: f64 = 1e-8;

/// `−Σ λ ln λ` over the spectrum, in nats.
pub fn von_neumann_entropy(rho: &ComplexMatrix) -> Result<f64> {
    let tr = rho.trace();
    if (tr - c(1.0, 0.0)).norm() >= TRACE_TOL {
        return Err(invalid(format!("entropy needs a unit-trace state, trace is {tr}")));
    }
    let spectrum = clamp_spectrum(&eigh(rho)?.values)?;
    Ok(spectrum.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.ln()).sum::<f64>().max(0.0))
}

/// `tr ρ²`.
pub fn purity(rho: &ComplexMatrix) -> f64 {
    rho.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// Normalized subspace density for every state of a trajectory.
pub fn subspace_series(traj: &Trajectory, sub: &Subspace, trace_floor: f64) -> Result<Vec<SubspaceDensity>> {
    traj.states
        .iter()
        .map(|rho| normalize_subspace(&subspace_density(rho, sub)?, trace_floor))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropySeries {
    pub times: Vec<f64>,
    /// Entropy of the normalized subspace density.
    pub s_v: Vec<f64>,
    /// Trace of the unnormalized subspace density.
    pub trace_g: Vec<f64>,
}

impl EntropySeries {
    pub fn from_trajectory(traj: &Trajectory, sub: &Subspace, trace_floor: f64) -> Result<Self> {
        let mut s_v = Vec::with_capacity(traj.len());
        let mut trace_g = Vec::with_capacity(traj.len());
        for rho in &traj.states {
            let sd = subspace_density(rho, sub)?;
            trace_g.push(sd.trace);
            s_v.push(von_neumann_entropy(&normalize_subspace(&sd, trace_floor)?.matrix)?);
        }
        Ok(Self { times: traj.times.clone(), s_v, trace_g })
    }

    pub fn max_entropy(&self) -> f64 {
        self.s_v.iter().copied().fold(0.0, f64::max)
    }

    pub fn terminal_entropy(&self) -> Option<f64> {
        self.s_v.last().copied()
    }
}

/// Pointwise `S(t) − S₀(t)`.
pub fn entropy_response(s: &EntropySeries, s0: &EntropySeries) -> Result<Vec<f64>> {
    let same_grid = s.times.len() == s0.times.len()
        && s.times.iter().zip(&s0.times).all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0));
    if !same_grid || s.s_v.len() != s0.s_v.len() {
        return Err(invalid("entropy series are on different time grids"));
    }
    Ok(s.s_v.iter().zip(&s0.s_v).map(|(a, b)| a - b).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coherence {
    Coherent,
    Decoherent,
    Ambiguous,
}

impl Coherence {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Coherent => "Coherence",
            Self::Decoherent => "Decoherence",
            Self::Ambiguous => "Ambiguous",
        }
    }
}

impl std::fmt::Display for Coherence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Coherent when the entropy never reaches `coh_tol`, decoherent when it
/// exceeds `dec_tol` somewhere, ambiguous otherwise. The series is expected
/// to cover at least `γt = 10`.
pub fn coherence_verdict(s: &EntropySeries, coh_tol: f64, dec_tol: f64) -> Coherence {
    if s.s_v.iter().any(|v| !v.is_finite()) {
        return Coherence::Ambiguous;
    }
    let max = s.max_entropy();
    if max < coh_tol {
        Coherence::Coherent
    } else if max > dec_tol {
        Coherence::Decoherent
    } else {
        Coherence::Ambiguous
    }
}
