//! First-order-in-γ correction to closed-system dynamics, used as an
//! independent check on the Lindblad propagators.
//!
//! ```text
//! δρ(t) = −γ ∫₀ᵗ {O†O(t′), ρ₀(t)} dt′ + 2γ ∫₀ᵗ O(t′) ρ₀(t) O†(t′) dt′
//! O(t′) = e^{iHt′} O e^{−iHt′}
//! ```
//!
//! The integrals use composite Simpson quadrature over `t′`. The result is
//! the correction in the interaction frame, where the unperturbed state is
//! constant and equal to the initial state; [`first_order_residual`] makes
//! the comparison with a propagated state in that frame.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::linalg::{self, c, frobenius, ComplexMatrix};
use crate::observables::von_neumann_entropy;
use crate::spectra::{eigh, Eigh, Subspace};

pub const DEFAULT_QUADRATURE_PANELS: usize = 128;
pub const MIN_QUADRATURE_PANELS: usize = 16;

/// Mixing weight of the maximally mixed state used to regularize
/// rank-deficient states before taking logarithms.
pub const ENTROPY_REGULARIZATION: f64 = 1e-8;

/// Conjugation by `e^{iHt}`, with `H` diagonalized once.
#[derive(Debug, Clone)]
pub struct InteractionFrame {
    eig: Eigh,
}

impl InteractionFrame {
    pub fn new(h: &ComplexMatrix) -> Result<Self> {
        Ok(Self { eig: eigh(h)? })
    }

    pub fn dim(&self) -> usize {
        self.eig.values.len()
    }

    fn to_eigenbasis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.eig.vectors.adjoint() * m * &self.eig.vectors
    }

    fn from_eigenbasis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        &self.eig.vectors * m * self.eig.vectors.adjoint()
    }

    /// `A` written in the eigenbasis, rotated to time `t`:
    /// `A_ab e^{i(E_a − E_b)t}`.
    fn rotate(&self, a_eig: &ComplexMatrix, t: f64) -> ComplexMatrix {
        let e = &self.eig.values;
        ComplexMatrix::from_fn(a_eig.nrows(), a_eig.ncols(), |i, j| {
            a_eig[(i, j)] * cis((e[i] - e[j]) * t)
        })
    }

    /// `e^{iHt} O e^{−iHt}`.
    pub fn operator(&self, o: &ComplexMatrix, t: f64) -> ComplexMatrix {
        if t == 0.0 {
            return o.clone();
        }
        self.from_eigenbasis(&self.rotate(&self.to_eigenbasis(o), t))
    }

    /// `e^{−iHt} ρ e^{iHt}`.
    pub fn evolve_state(&self, rho: &ComplexMatrix, t: f64) -> ComplexMatrix {
        if t == 0.0 {
            return rho.clone();
        }
        self.from_eigenbasis(&self.rotate(&self.to_eigenbasis(rho), -t))
    }
}

fn cis(phi: f64) -> Complex64 {
    c(phi.cos(), phi.sin())
}

/// `e^{iHt} O e^{−iHt}` for Hermitian `H`.
pub fn interaction_picture(o: &ComplexMatrix, h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    linalg::ensure_same_dim(o, h)?;
    Ok(InteractionFrame::new(h)?.operator(o, t))
}

/// Closed-system state `e^{−iHt} ρ₀ e^{iHt}`.
pub fn unperturbed_state(rho0: &ComplexMatrix, h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    linalg::ensure_same_dim(rho0, h)?;
    Ok(InteractionFrame::new(h)?.evolve_state(rho0, t))
}

/// First-order correction `δρ(t)` with `ρ₀(t)` held fixed inside the
/// integral. `n_quad` is the number of Simpson panels and must be even and
/// at least [`MIN_QUADRATURE_PANELS`].
pub fn delta_rho(
    rho0_t: &ComplexMatrix,
    o: &ComplexMatrix,
    h: &ComplexMatrix,
    gamma: f64,
    t: f64,
    n_quad: usize,
) -> Result<ComplexMatrix> {
    linalg::ensure_same_dim(rho0_t, h)?;
    linalg::ensure_same_dim(o, h)?;
    if n_quad < MIN_QUADRATURE_PANELS || n_quad % 2 != 0 {
        return Err(invalid(format!(
            "Simpson quadrature needs an even panel count of at least {MIN_QUADRATURE_PANELS}, got {n_quad}"
        )));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid(format!("time must be finite and non-negative, got {t}")));
    }
    if !gamma.is_finite() {
        return Err(invalid("gamma must be finite"));
    }
    let n = h.nrows();
    if t == 0.0 {
        return Ok(linalg::zeros(n));
    }

    // Work in the eigenbasis of H, where the rotation is an entrywise phase.
    let frame = InteractionFrame::new(h)?;
    let o_eig = frame.to_eigenbasis(o);
    let rho_eig = frame.to_eigenbasis(rho0_t);
    let step = t / n_quad as f64;
    let mut k_int = linalg::zeros(n);
    let mut jump_int = linalg::zeros(n);
    for node in 0..=n_quad {
        let w = if node == 0 || node == n_quad {
            1.0
        } else if node % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let ot = frame.rotate(&o_eig, node as f64 * step);
        let ot_dag = ot.adjoint();
        k_int += (&ot_dag * &ot) * c(w, 0.0);
        jump_int += (&ot * &rho_eig * &ot_dag) * c(w, 0.0);
    }
    let scale = step / 3.0;
    let delta = ((&k_int * &rho_eig + &rho_eig * &k_int) * c(-gamma, 0.0) + jump_int * c(2.0 * gamma, 0.0)) * c(scale, 0.0);
    Ok(linalg::hermitian_part(&frame.from_eigenbasis(&delta)))
}

fn regularize(m: &ComplexMatrix, eps: f64) -> ComplexMatrix {
    let d = m.nrows() as f64;
    m * c(1.0 - eps, 0.0) + linalg::identity(m.nrows()) * (m.trace() * (eps / d))
}

/// Entropy change of the normalized subspace state when the first-order
/// correction is added, `S(N[ρ₀ + δ]) − S(ρ₀)`, with both operands mixed
/// towards `I/d` by [`ENTROPY_REGULARIZATION`] so rank-deficient `ρ₀` is
/// handled.
pub fn delta_entropy(rho0_sub: &ComplexMatrix, delta_sub: &ComplexMatrix) -> Result<f64> {
    linalg::ensure_same_dim(rho0_sub, delta_sub)?;
    let tr = rho0_sub.trace();
    if (tr - c(1.0, 0.0)).norm() >= 1e-8 {
        return Err(invalid(format!("unperturbed subspace state must have unit trace, got {tr}")));
    }
    let eps = ENTROPY_REGULARIZATION;
    let base = regularize(rho0_sub, eps);
    let perturbed = &base + regularize(delta_sub, eps);
    let ptr = perturbed.trace();
    if !(ptr.re > 0.0) {
        return Err(invalid("perturbed subspace state has non-positive trace"));
    }
    let perturbed = linalg::hermitian_part(&(perturbed / ptr));
    Ok(von_neumann_entropy(&perturbed)? - von_neumann_entropy(&linalg::hermitian_part(&base))?)
}

/// Least-squares coefficient and residual of `a ≈ k·b` in the Frobenius
/// inner product.
pub fn proportionality(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<(Complex64, f64)> {
    linalg::ensure_same_dim(a, b)?;
    let bb: f64 = b.iter().map(|z| z.norm_sqr()).sum();
    if bb == 0.0 {
        return Ok((c(0.0, 0.0), frobenius(a)));
    }
    let k = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum::<Complex64>() / bb;
    Ok((k, frobenius(&(a - b * k))))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(invalid("slope fit needs at least two matching points"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(invalid("slope fit needs positive finite data"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("slope fit needs distinct abscissae"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Distance between a propagated state and its first-order prediction,
/// `‖e^{iHt} ρ(t) e^{−iHt} − ρ₀ − δρ‖`, taken in the interaction frame
/// where the unperturbed state is constant.
pub fn first_order_residual(
    rho_t: &ComplexMatrix,
    rho0: &ComplexMatrix,
    delta: &ComplexMatrix,
    h: &ComplexMatrix,
    t: f64,
) -> Result<f64> {
    linalg::ensure_same_dim(rho_t, rho0)?;
    linalg::ensure_same_dim(delta, rho0)?;
    let frame = InteractionFrame::new(h)?;
    let rho_i = frame.evolve_state(rho_t, -t);
    Ok(frobenius(&(rho_i - rho0 - delta)))
}

#[derive(Debug, Clone)]
pub struct PerturbativeResult {
    pub delta_rho: ComplexMatrix,
    pub delta_s_v: f64,
    /// Fitted exponent of the first-order residual against γ; `NaN` until a
    /// sweep fills it in.
    pub order_estimate: f64,
}

/// `δρ(t)` together with the entropy response of the subspace state.
/// `rho0_t` must have unit trace inside `sub`.
pub fn perturbative_result(
    rho0_t: &ComplexMatrix,
    o: &ComplexMatrix,
    h: &ComplexMatrix,
    gamma: f64,
    t: f64,
    n_quad: usize,
    sub: &Subspace,
) -> Result<PerturbativeResult> {
    let delta_rho = delta_rho(rho0_t, o, h, gamma, t, n_quad)?;
    let b = sub.basis_matrix();
    let rho0_sub = b.adjoint() * rho0_t * &b;
    let delta_sub = b.adjoint() * &delta_rho * &b;
    let delta_s_v = delta_entropy(&rho0_sub, &delta_sub)?;
    Ok(PerturbativeResult { delta_rho, delta_s_v, order_estimate: f64::NAN })
}
