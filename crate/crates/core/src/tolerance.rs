use serde::Serialize;

/// Environment variable that multiplies every default tolerance.
pub const TOLERANCE_SCALE_ENV: &str = "LSL_TOLERANCE_SCALE";

/// Tolerances used by the symmetry tests, the subspace machinery and the
/// coherence verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Frobenius-norm tolerance for commutation, hermiticity and
    /// proportionality checks.
    pub symmetry: f64,
    /// Relative tolerance (to the spectral spread) for degenerate levels.
    pub degeneracy: f64,
    /// Smallest subspace trace that can still be renormalized.
    pub trace_floor: f64,
    /// Max subspace entropy of a coherent trajectory.
    pub coherent: f64,
    /// Entropy above which a trajectory is decoherent.
    pub decoherent: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            symmetry: 1e-9,
            degeneracy: 1e-9,
            trace_floor: 1e-12,
            coherent: 1e-6,
            decoherent: 1e-2,
        }
    }
}

impl Tolerances {
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            symmetry: self.symmetry * factor,
            degeneracy: self.degeneracy * factor,
            trace_floor: self.trace_floor * factor,
            coherent: self.coherent * factor,
            decoherent: self.decoherent * factor,
        }
    }

    /// Defaults scaled by `LSL_TOLERANCE_SCALE` when it holds a positive
    /// finite number.
    pub fn from_env() -> Self {
        let factor = std::env::var(TOLERANCE_SCALE_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<f64>().ok())
            .filter(|f| f.is_finite() && *f > 0.0)
            .unwrap_or(1.0);
        Self::default().scaled(factor)
    }
}
