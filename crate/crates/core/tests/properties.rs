//! Randomized invariants.

use std::f64::consts::LN_2;

use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

use lsl_core::classify::{catalog, SymmetryContext};
use lsl_core::linalg::{c, expm, frobenius, hermiticity_residual, ComplexMatrix};
use lsl_core::lindblad::{liouvillian_matrix, rhs, vectorize, LindbladSystem};
use lsl_core::observables::von_neumann_entropy;
use lsl_core::operators::{spin_matrices, HamiltonianName};
use lsl_core::response::delta_rho;
use lsl_core::spectra::{ground_subspace, subspace_density};
use lsl_core::symmetry::{schur_test, time_reversal};
use lsl_core::tolerance::Tolerances;

fn complex_entries(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n)
}

fn matrix(n: usize, entries: &[(f64, f64)]) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |i, j| {
        let (re, im) = entries[i * n + j];
        c(re, im)
    })
}

/// `G G† / tr(G G†)`: positive, Hermitian, unit trace.
fn density(n: usize, entries: &[(f64, f64)]) -> ComplexMatrix {
    let g = matrix(n, entries);
    let p = &g * g.adjoint();
    let tr = p.trace();
    p / tr
}

fn unitary(n: usize, entries: &[(f64, f64)]) -> ComplexMatrix {
    let a = matrix(n, entries);
    let h = (&a + a.adjoint()) * c(0.0, 1.0);
    expm(&h).unwrap()
}

fn scenario_system(index: usize, gamma: f64) -> (LindbladSystem, lsl_core::spectra::Subspace) {
    let ctx = SymmetryContext::spin_three_halves().unwrap();
    let scenarios = catalog().unwrap();
    scenarios[index].system(&ctx, gamma, &Tolerances::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn superoperator_matches_rhs(idx in 0usize..16, gamma in 0.0..2.0f64, e in complex_entries(4)) {
        let (sys, _) = scenario_system(idx, gamma);
        let rho = density(4, &e);
        let l = liouvillian_matrix(&sys);
        let lhs = &l.matrix * vectorize(&rho);
        let direct = vectorize(&rhs(&rho, &sys).unwrap());
        prop_assert!((lhs - direct).norm() < 1e-12);
    }

    #[test]
    fn rhs_is_traceless_and_hermitian(idx in 0usize..16, gamma in 0.0..2.0f64, e in complex_entries(4)) {
        let (sys, _) = scenario_system(idx, gamma);
        let d = rhs(&density(4, &e), &sys).unwrap();
        prop_assert!(d.trace().norm() < 1e-12);
        prop_assert!(hermiticity_residual(&d) < 1e-12);
    }

    // The trace functional is a left zero-eigenvector of the superoperator.
    #[test]
    fn trace_is_a_left_null_vector(idx in 0usize..16, gamma in 0.0..2.0f64) {
        let (sys, _) = scenario_system(idx, gamma);
        let l = liouvillian_matrix(&sys);
        let tr = vectorize(&ComplexMatrix::identity(4, 4));
        prop_assert!((l.matrix.adjoint() * tr).norm() < 1e-10);
    }

    #[test]
    fn entropy_is_bounded_and_basis_free(n in 2usize..5, e in complex_entries(4), u in complex_entries(4)) {
        let rho = density(n, &e[..n * n]);
        let s = von_neumann_entropy(&rho).unwrap();
        prop_assert!(s >= 0.0 && s <= (n as f64).ln() + 1e-9);
        let u = unitary(n, &u[..n * n]);
        let rotated = &u * &rho * u.adjoint();
        prop_assert!((von_neumann_entropy(&rotated).unwrap() - s).abs() < 1e-10);
    }

    #[test]
    fn delta_rho_is_linear_in_gamma(idx in 0usize..16, gamma in 0.001..2.0f64, t in 0.0..10.0f64, e in complex_entries(4)) {
        let (sys, _) = scenario_system(idx, 1.0);
        let rho = density(4, &e);
        let unit = delta_rho(&rho, sys.o(), sys.h(), 1.0, t, 128).unwrap();
        let scaled = delta_rho(&rho, sys.o(), sys.h(), gamma, t, 128).unwrap();
        prop_assert!(frobenius(&(scaled - unit * c(gamma, 0.0))) < 1e-12 * (1.0 + gamma * t));
    }

    // The full-space trace of δρ vanishes; restricted to the ground level,
    // for a state living there, it can only lose weight.
    #[test]
    fn delta_rho_is_hermitian_and_loses_subspace_weight(
        idx in 0usize..16,
        gamma in 0.001..1.0f64,
        t in 0.0..10.0f64,
        a in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64),
    ) {
        let (sys, sub) = scenario_system(idx, gamma);
        let amps = [c(a.0, a.1), c(a.2, a.3)];
        let norm = (amps[0].norm_sqr() + amps[1].norm_sqr()).sqrt();
        prop_assume!(norm > 1e-3);
        let v = sub.state(&[amps[0] / norm, amps[1] / norm]).unwrap();
        let rho = &v * v.adjoint();
        let d = delta_rho(&rho, sys.o(), sys.h(), gamma, t, 128).unwrap();
        prop_assert!(hermiticity_residual(&d) < 1e-10);
        prop_assert!(d.trace().re.abs() < 1e-12 * (1.0 + gamma * t * 10.0));
        prop_assert!(subspace_density(&d, &sub).unwrap().trace <= 1e-12);
    }

    // At γ = 0.1 the window reaches t = 10; 128 panels leave ~3e-6 there, so
    // convergence is checked from 1024 panels.
    #[test]
    fn quadrature_has_converged_at_small_gamma_t(idx in 0usize..16, gamma_t in 0.01..1.0f64, e in complex_entries(4)) {
        let gamma = 0.1;
        let t = gamma_t / gamma;
        let (sys, _) = scenario_system(idx, gamma);
        let rho = density(4, &e);
        let coarse = delta_rho(&rho, sys.o(), sys.h(), gamma, t, 1024).unwrap();
        let fine = delta_rho(&rho, sys.o(), sys.h(), gamma, t, 2048).unwrap();
        prop_assert!(frobenius(&(coarse - fine)) < 1e-8);
    }

    #[test]
    fn subspace_weight_is_a_probability(idx in 0usize..16, e in complex_entries(4)) {
        let (_, sub) = scenario_system(idx, 0.1);
        let w = subspace_density(&density(4, &e), &sub).unwrap().trace;
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&w));
    }

    #[test]
    fn time_reversal_squares_to_the_spin_sign(twice_s in 1u32..6, e in complex_entries(6)) {
        let sp = lsl_core::operators::spin_matrices_twice(twice_s).unwrap();
        let t = time_reversal(&sp).unwrap();
        let n = sp.dim();
        let v = DVector::from_fn(n, |i, _| Complex64::new(e[i].0, e[i].1));
        let sign = if twice_s % 2 == 1 { -1.0 } else { 1.0 };
        prop_assert!((t.apply(&t.apply(&v)) - &v * c(sign, 0.0)).norm() < 1e-10 * (1.0 + v.norm()));
    }

    // Averaging any operator over the quaternion group lands in its commutant,
    // which acts as a scalar on the irreducible ground doublet.
    #[test]
    fn group_averaged_operators_pass_schur(e in complex_entries(4)) {
        let ctx = SymmetryContext::spin_three_halves().unwrap();
        let a = matrix(4, &e);
        let elements = ctx.quaternion.group.elements();
        let avg = elements.iter().fold(ComplexMatrix::zeros(4, 4), |acc, g| acc + g * &a * g.adjoint());
        let h = HamiltonianName::QSymmetric.matrix(&ctx.spins);
        let sub = ground_subspace(&h, 1e-9, None).unwrap();
        prop_assert!(schur_test(&avg, &sub.projector, 1e-9).unwrap().proportional);
    }
}

#[test]
fn ground_projector_commutes_with_hamiltonian_and_is_deterministic() {
    let sp = spin_matrices(1.5).unwrap();
    let t = time_reversal(&sp).unwrap();
    for h in HamiltonianName::ALL {
        let m = h.matrix(&sp);
        let pairing = (h != HamiltonianName::QSymmetric).then_some(&t);
        let a = ground_subspace(&m, 1e-9, pairing).unwrap();
        let b = ground_subspace(&m, 1e-9, pairing).unwrap();
        assert_eq!(a.basis, b.basis);
        let p = &a.projector;
        assert!(frobenius(&(p * &m - &m * p)) < 1e-9 * frobenius(&m));
        assert!(frobenius(&(p * p - p)) < 1e-10);
    }
}

#[test]
fn maximally_mixed_doublet_has_entropy_ln2() {
    let rho = ComplexMatrix::identity(2, 2) * c(0.5, 0.0);
    assert!((von_neumann_entropy(&rho).unwrap() - LN_2).abs() < 1e-15);
}
