//! Hermitian eigendecomposition, degenerate ground subspaces and the
//! density matrix restricted to them.

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, c, frobenius, hermiticity_residual, ComplexMatrix};
use crate::symmetry::AntiUnitaryOp;

/// Eigenvalues this far below zero are round-off and get clamped; anything
/// more negative is a positivity violation.
pub const POSITIVITY_FLOOR: f64 = -1e-7;

#[derive(Debug, Clone)]
pub struct Eigh {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

pub fn eigh(h: &ComplexMatrix) -> Result<Eigh> {
    linalg::ensure_square(h, "hermitian input")?;
    linalg::ensure_finite(h, "hermitian input")?;
    let r = hermiticity_residual(h);
    if r >= 1e-10 * frobenius(h).max(1.0) {
        return Err(invalid(format!("matrix is not Hermitian (residual {r:e})")));
    }
    let eig = SymmetricEigen::new(linalg::hermitian_part(h));
    let mut order: Vec<usize> = (0..h.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_columns(&order.iter().map(|&k| eig.eigenvectors.column(k)).collect::<Vec<_>>());
    Ok(Eigh { values, vectors })
}

/// Rotates `v` so that its largest-magnitude component is real and
/// positive. Ties go to the lowest index.
pub fn fix_phase(v: &mut DVector<Complex64>) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v.iter().position(|z| z.norm() >= max * (1.0 - 1e-9)).unwrap();
    let phase = v[pivot].conj() / v[pivot].norm();
    *v *= phase;
    v[pivot] = c(v[pivot].norm(), 0.0);
}

/// A degenerate eigenspace of a Hamiltonian.
#[derive(Debug, Clone)]
pub struct Subspace {
    pub energy: f64,
    pub basis: Vec<DVector<Complex64>>,
    pub projector: ComplexMatrix,
    /// Set when the whole spectrum is one degenerate level.
    pub full_space: bool,
}

impl Subspace {
    fn from_basis(energy: f64, basis: Vec<DVector<Complex64>>, full_space: bool) -> Self {
        let n = basis[0].len();
        let mut projector = linalg::zeros(n);
        for v in &basis {
            projector += v * v.adjoint();
        }
        Self { energy, basis, projector, full_space }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn full_dim(&self) -> usize {
        self.projector.nrows()
    }

    /// `n × d` matrix whose columns are the basis vectors.
    pub fn basis_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_columns(&self.basis)
    }

    /// `Σ_k amplitudes[k]·|φ_k⟩`.
    pub fn state(&self, amplitudes: &[Complex64]) -> Result<DVector<Complex64>> {
        if amplitudes.len() != self.dim() {
            return Err(invalid(format!(
                "{} amplitudes for a {}-dimensional subspace",
                amplitudes.len(),
                self.dim()
            )));
        }
        let mut v = DVector::zeros(self.full_dim());
        for (a, phi) in amplitudes.iter().zip(&self.basis) {
            v += phi * *a;
        }
        Ok(v)
    }
}

/// Lowest eigenspace of `h`: every eigenvector with
/// `λ − λ_min < rel_tol · (λ_max − λ_min)`.
///
/// With `pairing`, basis vectors come in Kramers pairs `(φ, Tφ)`.
pub fn ground_subspace(h: &ComplexMatrix, rel_tol: f64, pairing: Option<&AntiUnitaryOp>) -> Result<Subspace> {
    let eig = eigh(h)?;
    let lo = eig.values[0];
    let spread = eig.values[eig.values.len() - 1] - lo;
    let full_space = spread <= f64::EPSILON * frobenius(h).max(1.0);
    let count = if full_space {
        eig.values.len()
    } else {
        eig.values.iter().take_while(|&&v| v - lo < rel_tol * spread).count()
    };
    let energy = eig.values[..count].iter().sum::<f64>() / count as f64;
    let raw: Vec<DVector<Complex64>> = (0..count).map(|k| eig.vectors.column(k).into_owned()).collect();

    let basis = match pairing {
        None => raw
            .into_iter()
            .map(|mut v| {
                fix_phase(&mut v);
                v
            })
            .collect(),
        Some(t) => kramers_pairs(&raw, t)?,
    };
    Ok(Subspace::from_basis(energy, basis, full_space))
}

fn orthonormalize_against(v: &DVector<Complex64>, chosen: &[DVector<Complex64>]) -> Option<DVector<Complex64>> {
    let mut w = v.clone();
    for u in chosen {
        let overlap = u.dotc(&w);
        w -= u * overlap;
    }
    let norm = w.norm();
    (norm > 1e-6).then(|| w / c(norm, 0.0))
}

fn kramers_pairs(raw: &[DVector<Complex64>], t: &AntiUnitaryOp) -> Result<Vec<DVector<Complex64>>> {
    if raw[0].len() != t.dim() {
        return Err(invalid("time-reversal operator has the wrong dimension"));
    }
    let d = raw.len();
    let span: ComplexMatrix = ComplexMatrix::from_columns(raw);
    let projector = &span * span.adjoint();
    let mut chosen: Vec<DVector<Complex64>> = Vec::with_capacity(d);
    for v in raw {
        if chosen.len() == d {
            break;
        }
        let Some(mut plus) = orthonormalize_against(v, &chosen) else { continue };
        fix_phase(&mut plus);
        let partner = t.apply(&plus);
        let leak = (&partner - &projector * &partner).norm();
        if leak > 1e-8 {
            return Err(invalid(format!("T maps the subspace outside itself (leak {leak:e})")));
        }
        chosen.push(plus);
        let minus = orthonormalize_against(&partner, &chosen)
            .ok_or_else(|| invalid("Kramers partner is parallel to its state; T² ≠ −1?"))?;
        chosen.push(minus);
    }
    if chosen.len() != d {
        return Err(invalid(format!("could not pair a {d}-dimensional subspace")));
    }
    Ok(chosen)
}

/// Groups ascending eigenvalues into degenerate levels and returns their
/// multiplicities.
pub fn multiplicities(values: &[f64], rel_tol: f64) -> Vec<usize> {
    let spread = values.last().unwrap_or(&0.0) - values.first().unwrap_or(&0.0);
    let gap = (rel_tol * spread).max(f64::EPSILON);
    let mut out: Vec<usize> = Vec::new();
    let mut prev: Option<f64> = None;
    for &v in values {
        match prev {
            Some(p) if v - p <= gap => *out.last_mut().unwrap() += 1,
            _ => out.push(1),
        }
        prev = Some(v);
    }
    out
}

/// Whether every energy level of the time-reversal symmetric `h` has even
/// degeneracy.
pub fn kramers_check(h: &ComplexMatrix, t: &AntiUnitaryOp) -> Result<bool> {
    let eig = eigh(h)?;
    let r = crate::symmetry::antiunitary_residual(h, t)?;
    if r >= 1e-9 * frobenius(h).max(1.0) {
        return Err(invalid(format!("hamiltonian is not time-reversal symmetric (residual {r:e})")));
    }
    Ok(multiplicities(&eig.values, 1e-9).iter().all(|m| m % 2 == 0))
}

/// Density matrix restricted to a subspace, `ρ_ab = ⟨φ_a|ρ|φ_b⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceDensity {
    pub matrix: ComplexMatrix,
    pub trace: f64,
}

impl SubspaceDensity {
    pub fn new(matrix: ComplexMatrix) -> Self {
        let trace = matrix.trace().re;
        Self { matrix, trace }
    }
}

pub fn subspace_density(rho: &ComplexMatrix, sub: &Subspace) -> Result<SubspaceDensity> {
    if rho.nrows() != sub.full_dim() || rho.ncols() != sub.full_dim() {
        return Err(invalid("density matrix and subspace dimensions differ"));
    }
    let b = sub.basis_matrix();
    Ok(SubspaceDensity::new(b.adjoint() * rho * b))
}

/// Renormalizes to unit trace. Fails instead of dividing by a vanishing
/// trace.
pub fn normalize_subspace(sd: &SubspaceDensity, trace_floor: f64) -> Result<SubspaceDensity> {
    if !(sd.trace > trace_floor) {
        return Err(Error::SubspaceDepleted { trace: sd.trace, floor: trace_floor });
    }
    Ok(SubspaceDensity::new(sd.matrix.unscale(sd.trace)))
}

/// Clamps a density-matrix spectrum into `[0, 1]`; values below
/// [`POSITIVITY_FLOOR`] are an error.
pub fn clamp_spectrum(values: &[f64]) -> Result<Vec<f64>> {
    values
        .iter()
        .map(|&v| {
            if v < POSITIVITY_FLOOR {
                Err(Error::Positivity { eigenvalue: v })
            } else {
                Ok(v.clamp(0.0, 1.0))
            }
        })
        .collect()
}
