//! Lindblad master equation with a single jump operator:
//!
//! ```text
//! dρ/dt = −i[H, ρ] − γ{ρ, O†O} + 2γ OρO†
//! ```
//!
//! Two propagators are provided: fixed-step RK4 on the matrix equation and
//! the exponential of the vectorized Liouvillian. Vectorization is
//! row-major, `ρ_ij ↦ |i⟩⊗|j⟩` (component `i·n + j`).

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, c, frobenius, hermiticity_residual, kron, ComplexMatrix};
use crate::spectra::Subspace;
use crate::symmetry::ProportionalityReport;

/// Default propagation horizon in units of `1/γ`.
pub const DEFAULT_HORIZON: f64 = 20.0;

/// RK4 trajectories whose trace drifts further than this are rejected.
pub const MAX_TRACE_DRIFT: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct LindbladSystem {
    h: ComplexMatrix,
    o: ComplexMatrix,
    o_dag: ComplexMatrix,
    o_dag_o: ComplexMatrix,
    gamma: f64,
}

impl LindbladSystem {
    pub fn new(h: ComplexMatrix, o: ComplexMatrix, gamma: f64) -> Result<Self> {
        linalg::ensure_same_dim(&h, &o)?;
        linalg::ensure_finite(&h, "hamiltonian")?;
        linalg::ensure_finite(&o, "coupling operator")?;
        let r = hermiticity_residual(&h);
        if r >= 1e-10 * frobenius(&h).max(1.0) {
            return Err(invalid(format!("hamiltonian is not Hermitian (residual {r:e})")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(invalid(format!("gamma must be finite and non-negative, got {gamma}")));
        }
        let o_dag = o.adjoint();
        let o_dag_o = &o_dag * &o;
        Ok(Self { h, o, o_dag, o_dag_o, gamma })
    }

    pub fn h(&self) -> &ComplexMatrix {
        &self.h
    }

    pub fn o(&self) -> &ComplexMatrix {
        &self.o
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.h.clone(), self.o.clone(), gamma)
    }

    /// `0.01 / max(‖H‖, γ‖O†O‖, 1)`.
    pub fn default_dt(&self) -> f64 {
        0.01 / frobenius(&self.h).max(self.gamma * frobenius(&self.o_dag_o)).max(1.0)
    }

    /// Writes the right-hand side into `out`; `scratch` is clobbered.
    fn rhs_into(&self, rho: &ComplexMatrix, out: &mut ComplexMatrix, scratch: &mut ComplexMatrix) {
        let g = self.gamma;
        out.gemm(c(0.0, -1.0), &self.h, rho, c(0.0, 0.0));
        out.gemm(c(0.0, 1.0), rho, &self.h, c(1.0, 0.0));
        if g != 0.0 {
            out.gemm(c(-g, 0.0), &self.o_dag_o, rho, c(1.0, 0.0));
            out.gemm(c(-g, 0.0), rho, &self.o_dag_o, c(1.0, 0.0));
            scratch.gemm(c(1.0, 0.0), &self.o, rho, c(0.0, 0.0));
            out.gemm(c(2.0 * g, 0.0), scratch, &self.o_dag, c(1.0, 0.0));
        }
    }
}

pub fn rhs(rho: &ComplexMatrix, sys: &LindbladSystem) -> Result<ComplexMatrix> {
    linalg::ensure_same_dim(rho, &sys.h)?;
    let n = sys.dim();
    let mut out = linalg::zeros(n);
    let mut scratch = linalg::zeros(n);
    sys.rhs_into(rho, &mut out, &mut scratch);
    Ok(out)
}

/// `‖dρ/dt‖`; zero at a stationary state.
pub fn stationarity(rho: &ComplexMatrix, sys: &LindbladSystem) -> Result<f64> {
    Ok(frobenius(&rhs(rho, sys)?))
}

pub fn vectorize(rho: &ComplexMatrix) -> DVector<Complex64> {
    let n = rho.nrows();
    DVector::from_iterator(n * n, (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|ij| rho[ij]))
}

pub fn devectorize(v: &DVector<Complex64>, n: usize) -> ComplexMatrix {
    assert_eq!(v.len(), n * n, "vector length is not n²");
    ComplexMatrix::from_fn(n, n, |i, j| v[i * n + j])
}

/// The `n² × n²` Liouvillian acting on row-major vectorized density
/// matrices.
#[derive(Debug, Clone)]
pub struct LiouvillianMatrix {
    pub matrix: ComplexMatrix,
    pub dim: usize,
}

impl LiouvillianMatrix {
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        devectorize(&(&self.matrix * vectorize(rho)), self.dim)
    }
}

/// `−i(H⊗I − I⊗Hᵀ) + γ(2 O⊗O* − O†O⊗I − I⊗(O†O)ᵀ)`.
pub fn liouvillian_matrix(sys: &LindbladSystem) -> LiouvillianMatrix {
    let n = sys.dim();
    let id = linalg::identity(n);
    let unitary = (kron(&sys.h, &id) - kron(&id, &sys.h.transpose())) * c(0.0, -1.0);
    let dissipator = kron(&sys.o, &sys.o.conjugate()) * c(2.0, 0.0)
        - kron(&sys.o_dag_o, &id)
        - kron(&id, &sys.o_dag_o.transpose());
    LiouvillianMatrix { matrix: unitary + dissipator * c(sys.gamma, 0.0), dim: n }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Rk4,
    Expm,
}

impl std::str::FromStr for Integrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Self::Rk4),
            "expm" => Ok(Self::Expm),
            other => Err(invalid(format!("unknown integrator '{other}' (expected rk4 or expm)"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryMeta {
    pub integrator: Integrator,
    /// Step actually used by RK4 (`t_max` divided by the step count).
    pub dt: Option<f64>,
    /// Largest `|tr ρ − 1|` over the sampled states.
    pub max_trace_drift: f64,
    /// Largest `‖ρ − ρ†‖` of the propagated states before any
    /// re-Hermitization.
    pub max_hermiticity_residual: f64,
}

/// Time-stamped full-space density matrices.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ComplexMatrix>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&ComplexMatrix> {
        self.states.last()
    }
}

fn check_initial(rho0: &ComplexMatrix, sys: &LindbladSystem) -> Result<()> {
    linalg::ensure_same_dim(rho0, &sys.h)?;
    let r = hermiticity_residual(rho0);
    if r >= 1e-10 {
        return Err(invalid(format!("initial state is not Hermitian (residual {r:e})")));
    }
    let tr = rho0.trace();
    if (tr - c(1.0, 0.0)).norm() >= 1e-9 {
        return Err(invalid(format!("initial state has trace {tr}")));
    }
    Ok(())
}

/// `y ← y + a·x`.
fn axpy(y: &mut ComplexMatrix, a: Complex64, x: &ComplexMatrix) {
    y.zip_apply(x, |yi, xi| *yi += a * xi);
}

fn trace_drift(rho: &ComplexMatrix) -> f64 {
    (rho.trace() - c(1.0, 0.0)).norm()
}

/// Classical fixed-step fourth-order Runge–Kutta on the matrix equation.
///
/// The step is shrunk to `t_max / ceil(t_max / dt)` so the last step lands
/// on `t_max`. Every `sample_every`-th step and the final step are
/// recorded, re-Hermitized as `(ρ + ρ†)/2`.
pub fn evolve_rk4(
    rho0: &ComplexMatrix,
    sys: &LindbladSystem,
    dt: f64,
    t_max: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    check_initial(rho0, sys)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid(format!("dt must be positive, got {dt}")));
    }
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(invalid(format!("t_max must be non-negative, got {t_max}")));
    }
    if sample_every == 0 {
        return Err(invalid("sample_every must be at least 1"));
    }
    let steps = (t_max / dt - 1e-9).ceil().max(0.0) as usize;
    let h = if steps == 0 { 0.0 } else { t_max / steps as f64 };

    let n = sys.dim();
    let mut rho = rho0.clone();
    let mut k1 = linalg::zeros(n);
    let mut k2 = linalg::zeros(n);
    let mut k3 = linalg::zeros(n);
    let mut k4 = linalg::zeros(n);
    let mut stage = linalg::zeros(n);
    let mut scratch = linalg::zeros(n);

    let mut times = vec![0.0];
    let mut states = vec![linalg::hermitian_part(rho0)];
    let mut max_drift = trace_drift(rho0);
    let mut max_herm = hermiticity_residual(rho0);

    for step in 1..=steps {
        sys.rhs_into(&rho, &mut k1, &mut scratch);
        stage.copy_from(&rho);
        axpy(&mut stage, c(h / 2.0, 0.0), &k1);
        sys.rhs_into(&stage, &mut k2, &mut scratch);
        stage.copy_from(&rho);
        axpy(&mut stage, c(h / 2.0, 0.0), &k2);
        sys.rhs_into(&stage, &mut k3, &mut scratch);
        stage.copy_from(&rho);
        axpy(&mut stage, c(h, 0.0), &k3);
        sys.rhs_into(&stage, &mut k4, &mut scratch);

        axpy(&mut rho, c(h / 6.0, 0.0), &k1);
        axpy(&mut rho, c(h / 3.0, 0.0), &k2);
        axpy(&mut rho, c(h / 3.0, 0.0), &k3);
        axpy(&mut rho, c(h / 6.0, 0.0), &k4);

        if step % sample_every == 0 || step == steps {
            let drift = trace_drift(&rho);
            if !(drift <= MAX_TRACE_DRIFT) {
                return Err(Error::StepSize { drift, limit: MAX_TRACE_DRIFT, dt: h });
            }
            max_drift = max_drift.max(drift);
            max_herm = max_herm.max(hermiticity_residual(&rho));
            times.push(step as f64 * h);
            states.push(linalg::hermitian_part(&rho));
        }
    }

    Ok(Trajectory {
        times,
        states,
        meta: TrajectoryMeta {
            integrator: Integrator::Rk4,
            dt: Some(h),
            max_trace_drift: max_drift,
            max_hermiticity_residual: max_herm,
        },
    })
}

/// `vec ρ(t) = exp(tL) vec ρ0` at each requested time.
///
/// Consecutive times are reached by multiplying with `exp(Δt·L)`; equal
/// increments reuse one exponential.
pub fn evolve_expm(rho0: &ComplexMatrix, sys: &LindbladSystem, times: &[f64]) -> Result<Trajectory> {
    check_initial(rho0, sys)?;
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(invalid("times must be finite and non-negative"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("times must be ascending"));
    }
    let n = sys.dim();
    let l = liouvillian_matrix(sys);
    let mut v = vectorize(rho0);
    let mut prev = 0.0;
    let mut cached: Option<(f64, ComplexMatrix)> = None;
    let mut states = Vec::with_capacity(times.len());
    let mut max_drift: f64 = 0.0;
    let mut max_herm: f64 = 0.0;

    for &t in times {
        let delta = t - prev;
        if delta > 0.0 {
            let reuse = matches!(&cached, Some((d, _)) if (d - delta).abs() <= 1e-12 * delta);
            if !reuse {
                cached = Some((delta, linalg::expm(&(&l.matrix * c(delta, 0.0)))?));
            }
            v = &cached.as_ref().unwrap().1 * v;
        }
        prev = t;
        let rho = devectorize(&v, n);
        max_drift = max_drift.max(trace_drift(&rho));
        max_herm = max_herm.max(hermiticity_residual(&rho));
        states.push(rho);
    }

    Ok(Trajectory {
        times: times.to_vec(),
        states,
        meta: TrajectoryMeta {
            integrator: Integrator::Expm,
            dt: None,
            max_trace_drift: max_drift,
            max_hermiticity_residual: max_herm,
        },
    })
}

/// Uniform grid `0, t_max/samples, …, t_max`.
pub fn uniform_times(t_max: f64, samples: usize) -> Vec<f64> {
    let samples = samples.max(1);
    (0..=samples).map(|k| t_max * k as f64 / samples as f64).collect()
}

/// Liouvillian restricted to the operators `|φ_a⟩⟨φ_b|` on a subspace;
/// row and column index `a·d + b`.
pub fn subspace_block(l: &LiouvillianMatrix, sub: &Subspace) -> Result<ComplexMatrix> {
    if sub.full_dim() != l.dim {
        return Err(invalid("subspace and Liouvillian dimensions differ"));
    }
    let d = sub.dim();
    let columns: Vec<DVector<Complex64>> = (0..d * d)
        .map(|ab| {
            let (a, b) = (ab / d, ab % d);
            kron(&ComplexMatrix::from_columns(&[sub.basis[a].clone()]), &ComplexMatrix::from_columns(&[sub.basis[b].conjugate()]))
                .column(0)
                .into_owned()
        })
        .collect();
    let w = ComplexMatrix::from_columns(&columns);
    Ok(w.adjoint() * &l.matrix * w)
}

/// Same block as [`subspace_block`], computed by applying the right-hand
/// side to `|φ_c⟩⟨φ_d|` instead of forming the full Liouvillian:
/// entry `(ab, cd)` is `⟨φ_a| 𝓛(|φ_c⟩⟨φ_d|) |φ_b⟩`.
pub fn subspace_block_direct(sys: &LindbladSystem, sub: &Subspace) -> Result<ComplexMatrix> {
    if sub.full_dim() != sys.dim() {
        return Err(invalid("subspace and system dimensions differ"));
    }
    let d = sub.dim();
    let mut block = linalg::zeros(d * d);
    for cd in 0..d * d {
        let (cc, dd) = (cd / d, cd % d);
        let image = rhs(&(&sub.basis[cc] * sub.basis[dd].adjoint()), sys)?;
        for ab in 0..d * d {
            let (a, b) = (ab / d, ab % d);
            block[(ab, cd)] = sub.basis[a].dotc(&(&image * &sub.basis[b]));
        }
    }
    Ok(block)
}

/// Proportionality of a square block to the identity; the tolerance is
/// relative to `max(1, |coefficient|)`.
pub fn block_identity_test(block: &ComplexMatrix, tol: f64) -> ProportionalityReport {
    let dim = block.nrows().max(1) as f64;
    let coefficient = block.trace() / dim;
    let residual = frobenius(&(block - linalg::identity(block.nrows()) * coefficient));
    ProportionalityReport {
        proportional: residual < tol * coefficient.norm().max(1.0),
        coefficient,
        residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::spin_matrices;

    fn pure(v: &[Complex64]) -> ComplexMatrix {
        let v = DVector::from_row_slice(v);
        let v = &v / c(v.norm(), 0.0);
        &v * v.adjoint()
    }

    #[test]
    fn dephasing_fixed_point() {
        let sp = spin_matrices(1.5).unwrap();
        let sys = LindbladSystem::new(linalg::zeros(4), sp.sz.clone(), 0.3).unwrap();
        let rho = pure(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(frobenius(&rhs(&rho, &sys).unwrap()) < 1e-15);
    }

    #[test]
    fn closed_system_limit() {
        let sp = spin_matrices(1.5).unwrap();
        let h = &sp.sx * &sp.sz + &sp.sz * &sp.sx;
        let sys = LindbladSystem::new(h.clone(), sp.sy.clone(), 0.0).unwrap();
        let rho = pure(&[c(1.0, 0.0), c(0.3, 0.2), c(0.0, -1.0), c(0.5, 0.0)]);
        let want = (&h * &rho - &rho * &h) * c(0.0, -1.0);
        assert_eq!(rhs(&rho, &sys).unwrap(), want);
    }

    #[test]
    fn vectorization_is_row_major() {
        let m = ComplexMatrix::from_fn(3, 3, |i, j| c(i as f64, j as f64));
        let v = vectorize(&m);
        assert_eq!(v[1 * 3 + 2], c(1.0, 2.0));
        assert_eq!(devectorize(&v, 3), m);
    }

    #[test]
    fn unitary_liouvillian_is_diagonal_gap_matrix() {
        let energies = [0.3, -1.0, 2.5];
        let h = ComplexMatrix::from_fn(3, 3, |i, j| if i == j { c(energies[i], 0.0) } else { c(0.0, 0.0) });
        let sys = LindbladSystem::new(h, linalg::identity(3), 0.0).unwrap();
        let l = liouvillian_matrix(&sys);
        for i in 0..3 {
            for j in 0..3 {
                let k = i * 3 + j;
                assert!((l.matrix[(k, k)] - c(0.0, -(energies[i] - energies[j]))).norm() < 1e-15);
            }
        }
        let off: f64 = (0..9).flat_map(|a| (0..9).map(move |b| (a, b))).filter(|(a, b)| a != b).map(|ab| l.matrix[ab].norm()).sum();
        assert_eq!(off, 0.0);
    }

    #[test]
    fn identity_jump_is_trivial() {
        let sys = LindbladSystem::new(linalg::zeros(4), linalg::identity(4), 0.7).unwrap();
        assert_eq!(frobenius(&liouvillian_matrix(&sys).matrix), 0.0);
    }

    #[test]
    fn system_validation() {
        let sp = spin_matrices(0.5).unwrap();
        assert!(LindbladSystem::new(sp.sx.clone(), sp.sz.clone(), -0.1).is_err());
        assert!(LindbladSystem::new(&sp.sx * c(0.0, 1.0), sp.sz.clone(), 0.1).is_err());
        assert!(LindbladSystem::new(sp.sx.clone(), linalg::identity(3), 0.1).is_err());
    }

    #[test]
    fn expm_at_zero_returns_initial_state() {
        let sp = spin_matrices(1.5).unwrap();
        let sys = LindbladSystem::new(&sp.sz * &sp.sz, sp.sx.clone(), 0.2).unwrap();
        let rho = pure(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)]);
        let tr = evolve_expm(&rho, &sys, &[0.0]).unwrap();
        assert_eq!(tr.states[0], rho);
    }

    #[test]
    fn rk4_rejects_bad_arguments() {
        let sp = spin_matrices(0.5).unwrap();
        let sys = LindbladSystem::new(sp.sz.clone(), sp.sx.clone(), 0.1).unwrap();
        let rho = pure(&[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(evolve_rk4(&rho, &sys, 0.0, 1.0, 1).is_err());
        assert!(evolve_rk4(&rho, &sys, 0.1, -1.0, 1).is_err());
        assert!(evolve_rk4(&rho, &sys, 0.1, 1.0, 0).is_err());
        assert!(evolve_rk4(&(&rho * c(2.0, 0.0)), &sys, 0.1, 1.0, 1).is_err());
        assert!(evolve_expm(&rho, &sys, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn rk4_reports_step_size_error() {
        let sp = spin_matrices(1.5).unwrap();
        let sys = LindbladSystem::new(&sp.sz * &sp.sz, sp.sx.clone(), 5.0).unwrap();
        let rho = pure(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let err = evolve_rk4(&rho, &sys, 0.5, 5.0, 1).unwrap_err();
        assert!(matches!(err, Error::StepSize { .. }), "{err}");
    }

    #[test]
    fn rk4_samples_land_on_grid() {
        let sp = spin_matrices(0.5).unwrap();
        let sys = LindbladSystem::new(sp.sz.clone(), sp.sx.clone(), 0.1).unwrap();
        let rho = pure(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let tr = evolve_rk4(&rho, &sys, 0.01, 1.0, 10).unwrap();
        assert_eq!(tr.len(), 11);
        assert!((tr.times[10] - 1.0).abs() < 1e-12);
        let tr = evolve_rk4(&rho, &sys, 0.3, 1.0, 2).unwrap();
        // 4 steps of 0.25: samples at 0, 0.5, 1.0
        assert_eq!(tr.times, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn direct_block_matches_liouvillian_block() {
        let sp = spin_matrices(1.5).unwrap();
        let h = &sp.sz * &sp.sz;
        let sub = crate::spectra::ground_subspace(&h, 1e-9, None).unwrap();
        let o = &sp.sx * &sp.sy;
        let sys = LindbladSystem::new(h, o, 0.3).unwrap();
        let a = subspace_block(&liouvillian_matrix(&sys), &sub).unwrap();
        let b = subspace_block_direct(&sys, &sub).unwrap();
        assert!(frobenius(&(a - b)) < 1e-13);
    }

    #[test]
    fn block_identity_examples() {
        let m = linalg::identity(4) * c(-0.3, 0.2);
        let r = block_identity_test(&m, 1e-9);
        assert!(r.proportional);
        assert_eq!(r.residual, 0.0);
        let d = ComplexMatrix::from_fn(4, 4, |i, j| if i == j { c(if i == 3 { 2.0 } else { 1.0 }, 0.0) } else { c(0.0, 0.0) });
        assert!(!block_identity_test(&d, 1e-9).proportional);
    }
}
