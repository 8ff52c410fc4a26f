//! Spin angular-momentum matrices and the catalog of named Hamiltonians and
//! coupling operators.
//!
//! Basis ordering is `|s⟩, |s−1⟩, …, |−s⟩`, so `Sz` is diagonal with
//! descending entries.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::linalg::{self, c, ensure_same_dim, hermiticity_residual, ComplexMatrix, MAX_DIM};

/// Residual below which a constructed operator counts as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SpinTriple {
    twice_s: u32,
    pub sx: ComplexMatrix,
    pub sy: ComplexMatrix,
    pub sz: ComplexMatrix,
}

impl SpinTriple {
    pub fn s(&self) -> f64 {
        self.twice_s as f64 / 2.0
    }

    pub fn twice_s(&self) -> u32 {
        self.twice_s
    }

    pub fn dim(&self) -> usize {
        self.twice_s as usize + 1
    }

    pub fn is_half_integer(&self) -> bool {
        self.twice_s % 2 == 1
    }

    pub fn identity(&self) -> ComplexMatrix {
        linalg::identity(self.dim())
    }
}

/// Spin matrices for spin `s` from the ladder-operator construction.
pub fn spin_matrices(s: f64) -> Result<SpinTriple> {
    let twice = 2.0 * s;
    if !twice.is_finite() || twice <= 0.0 || twice.fract() != 0.0 {
        return Err(invalid(format!("spin must be a positive half-integer, got {s}")));
    }
    spin_matrices_twice(twice as u32)
}

/// Same as [`spin_matrices`] but takes `2s`.
pub fn spin_matrices_twice(twice_s: u32) -> Result<SpinTriple> {
    if twice_s == 0 {
        return Err(invalid("spin must be positive"));
    }
    let dim = twice_s as usize + 1;
    if dim > MAX_DIM {
        return Err(invalid(format!("spin dimension {dim} exceeds {MAX_DIM}")));
    }
    let s = twice_s as f64 / 2.0;
    let m = |k: usize| s - k as f64;

    // S+ |m⟩ = sqrt(s(s+1) − m(m+1)) |m+1⟩; |m+1⟩ sits one row above |m⟩.
    let mut raise = linalg::zeros(dim);
    for k in 1..dim {
        let mk = m(k);
        raise[(k - 1, k)] = c((s * (s + 1.0) - mk * (mk + 1.0)).sqrt(), 0.0);
    }
    let lower = raise.adjoint();
    let sx = (&raise + &lower) * c(0.5, 0.0);
    let sy = (&raise - &lower) * c(0.0, -0.5);
    let sz = ComplexMatrix::from_fn(dim, dim, |i, j| if i == j { c(m(i), 0.0) } else { c(0.0, 0.0) });
    Ok(SpinTriple { twice_s, sx, sy, sz })
}

/// `ab − ba`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_same_dim(a, b)?;
    Ok(a * b - b * a)
}

/// `ab + ba`.
pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_same_dim(a, b)?;
    Ok(a * b + b * a)
}

/// The three model Hamiltonians (before the `E_g` scale).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum HamiltonianName {
    /// `SxSySz + SzSySx`, invariant under the quaternion group only.
    QSymmetric,
    /// `{Sx, Sz}`, invariant under time reversal only.
    TrInvariant,
    /// `Sz²`, invariant under both.
    BothSymmetric,
}

impl HamiltonianName {
    pub const ALL: [HamiltonianName; 3] = [Self::QSymmetric, Self::TrInvariant, Self::BothSymmetric];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::QSymmetric => "q_symmetric",
            Self::TrInvariant => "tr_invariant",
            Self::BothSymmetric => "both_symmetric",
        }
    }

    pub fn formula(self) -> &'static str {
        match self {
            Self::QSymmetric => "SxSySz+SzSySx",
            Self::TrInvariant => "SxSz+SzSx",
            Self::BothSymmetric => "Sz^2",
        }
    }

    pub fn matrix(self, spins: &SpinTriple) -> ComplexMatrix {
        let (x, y, z) = (&spins.sx, &spins.sy, &spins.sz);
        match self {
            Self::QSymmetric => x * y * z + z * y * x,
            Self::TrInvariant => x * z + z * x,
            Self::BothSymmetric => z * z,
        }
    }
}

impl fmt::Display for HamiltonianName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HamiltonianName {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|h| h.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown hamiltonian '{s}'")))
    }
}

/// Coupling operators used by the model scenarios. Note that
/// `i(SxSySz−SzSySx)` is Hermitian; `i(SxSySz+SzSySx)` is its non-Hermitian
/// counterpart with the same symmetries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CouplingName {
    Sy2,
    SxSySym,
    SxSySz,
    SySz,
    Sx2,
    Sz,
    ISz,
    Sx,
    SxSySzSym,
    ISxSySzAsym,
    ISxSySzSym,
    SxSy,
    Sx2Sz,
}

impl CouplingName {
    pub const ALL: [CouplingName; 13] = [
        Self::Sy2,
        Self::SxSySym,
        Self::SxSySz,
        Self::SySz,
        Self::Sx2,
        Self::Sz,
        Self::ISz,
        Self::Sx,
        Self::SxSySzSym,
        Self::ISxSySzAsym,
        Self::ISxSySzSym,
        Self::SxSy,
        Self::Sx2Sz,
    ];

    /// Canonical ASCII name accepted in configs and on the command line.
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Sy2 => "sy2",
            Self::SxSySym => "sxsy_sym",
            Self::SxSySz => "sxsysz",
            Self::SySz => "sysz",
            Self::Sx2 => "sx2",
            Self::Sz => "sz",
            Self::ISz => "i_sz",
            Self::Sx => "sx",
            Self::SxSySzSym => "sxsysz_sym",
            Self::ISxSySzAsym => "i_sxsysz_asym",
            Self::ISxSySzSym => "i_sxsysz_sym",
            Self::SxSy => "sxsy",
            Self::Sx2Sz => "sx2sz",
        }
    }

    pub fn formula(self) -> &'static str {
        match self {
            Self::Sy2 => "Sy^2",
            Self::SxSySym => "SxSy+SySx",
            Self::SxSySz => "SxSySz",
            Self::SySz => "SySz",
            Self::Sx2 => "Sx^2",
            Self::Sz => "Sz",
            Self::ISz => "iSz",
            Self::Sx => "Sx",
            Self::SxSySzSym => "SxSySz+SzSySx",
            Self::ISxSySzAsym => "i(SxSySz-SzSySx)",
            Self::ISxSySzSym => "i(SxSySz+SzSySx)",
            Self::SxSy => "SxSy",
            Self::Sx2Sz => "Sx^2Sz",
        }
    }

    pub fn matrix(self, spins: &SpinTriple) -> ComplexMatrix {
        let (x, y, z) = (&spins.sx, &spins.sy, &spins.sz);
        match self {
            Self::Sy2 => y * y,
            Self::SxSySym => x * y + y * x,
            Self::SxSySz => x * y * z,
            Self::SySz => y * z,
            Self::Sx2 => x * x,
            Self::Sz => z.clone(),
            Self::ISz => z * c(0.0, 1.0),
            Self::Sx => x.clone(),
            Self::SxSySzSym => x * y * z + z * y * x,
            Self::ISxSySzAsym => (x * y * z - z * y * x) * c(0.0, 1.0),
            Self::ISxSySzSym => (x * y * z + z * y * x) * c(0.0, 1.0),
            Self::SxSy => x * y,
            Self::Sx2Sz => x * x * z,
        }
    }
}

impl fmt::Display for CouplingName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CouplingName {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown coupling operator '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSource {
    Named(String),
    Literal(ComplexMatrix),
}

/// A named catalog operator or a literal matrix, times a real scale
/// (the `E_g` energy for Hamiltonians).
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    pub source: OperatorSource,
    pub scale: f64,
}

impl OperatorSpec {
    pub fn named(name: impl Into<String>) -> Self {
        Self { source: OperatorSource::Named(name.into()), scale: 1.0 }
    }

    pub fn literal(m: ComplexMatrix) -> Self {
        Self { source: OperatorSource::Literal(m), scale: 1.0 }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn label(&self) -> String {
        match &self.source {
            OperatorSource::Named(n) => n.clone(),
            OperatorSource::Literal(m) => format!("literal {}x{}", m.nrows(), m.ncols()),
        }
    }

    fn check_scale(&self) -> Result<()> {
        if !self.scale.is_finite() {
            return Err(invalid(format!("operator scale {} is not finite", self.scale)));
        }
        Ok(())
    }

    fn literal_checked(m: &ComplexMatrix, spins: &SpinTriple) -> Result<ComplexMatrix> {
        linalg::ensure_square(m, "literal operator")?;
        linalg::ensure_finite(m, "literal operator")?;
        if m.nrows() != spins.dim() {
            return Err(invalid(format!(
                "literal operator has dimension {}, spin space has {}",
                m.nrows(),
                spins.dim()
            )));
        }
        Ok(m.clone())
    }
}

pub fn build_hamiltonian(spec: &OperatorSpec, spins: &SpinTriple) -> Result<ComplexMatrix> {
    spec.check_scale()?;
    let base = match &spec.source {
        OperatorSource::Named(name) => name.parse::<HamiltonianName>()?.matrix(spins),
        OperatorSource::Literal(m) => {
            let m = OperatorSpec::literal_checked(m, spins)?;
            let r = hermiticity_residual(&m);
            if r > HERMITIAN_TOL * linalg::frobenius(&m).max(1.0) {
                return Err(invalid(format!("literal hamiltonian is not Hermitian (residual {r:e})")));
            }
            m
        }
    };
    Ok(base * c(spec.scale, 0.0))
}

/// Hermiticity of the result is not checked here; use
/// [`crate::symmetry::is_hermitian`] to classify it.
pub fn build_coupling(spec: &OperatorSpec, spins: &SpinTriple) -> Result<ComplexMatrix> {
    spec.check_scale()?;
    let base = match &spec.source {
        OperatorSource::Named(name) => name.parse::<CouplingName>()?.matrix(spins),
        OperatorSource::Literal(m) => OperatorSpec::literal_checked(m, spins)?,
    };
    Ok(base * c(spec.scale, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius, identity};

    fn max_abs(m: &ComplexMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn spin_three_halves_matches_displayed_matrices() {
        let sp = spin_matrices(1.5).unwrap();
        let r3 = 3f64.sqrt() / 2.0;
        let sx = ComplexMatrix::from_row_slice(
            4,
            4,
            &[
                c(0.0, 0.0), c(r3, 0.0), c(0.0, 0.0), c(0.0, 0.0),
                c(r3, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0),
                c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(r3, 0.0),
                c(0.0, 0.0), c(0.0, 0.0), c(r3, 0.0), c(0.0, 0.0),
            ],
        );
        let sy = ComplexMatrix::from_row_slice(
            4,
            4,
            &[
                c(0.0, 0.0), c(0.0, -r3), c(0.0, 0.0), c(0.0, 0.0),
                c(0.0, r3), c(0.0, 0.0), c(0.0, -1.0), c(0.0, 0.0),
                c(0.0, 0.0), c(0.0, 1.0), c(0.0, 0.0), c(0.0, -r3),
                c(0.0, 0.0), c(0.0, 0.0), c(0.0, r3), c(0.0, 0.0),
            ],
        );
        assert_eq!(sp.sx, sx);
        assert_eq!(sp.sy, sy);
        let diag: Vec<f64> = (0..4).map(|k| sp.sz[(k, k)].re).collect();
        assert_eq!(diag, vec![1.5, 0.5, -0.5, -1.5]);
        assert_eq!(sp.sx[(0, 1)].re, 3f64.sqrt() / 2.0);
    }

    #[test]
    fn spin_half_is_pauli_over_two() {
        let sp = spin_matrices(0.5).unwrap();
        let sx = ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0)]);
        assert_eq!(sp.sx, sx);
    }

    #[test]
    fn angular_momentum_algebra_holds() {
        for twice in [1u32, 2, 3, 5] {
            let sp = spin_matrices_twice(twice).unwrap();
            let i = c(0.0, 1.0);
            let cyc = [(&sp.sx, &sp.sy, &sp.sz), (&sp.sy, &sp.sz, &sp.sx), (&sp.sz, &sp.sx, &sp.sy)];
            for (a, b, k) in cyc {
                let r = commutator(a, b).unwrap() - k * i;
                assert!(max_abs(&r) < 1e-12, "2s={twice}: {}", max_abs(&r));
            }
            for m in [&sp.sx, &sp.sy, &sp.sz] {
                assert!(hermiticity_residual(m) < 1e-12);
            }
        }
    }

    #[test]
    fn invalid_spins_rejected() {
        for s in [0.0, -0.5, 0.3, 1.25, f64::NAN] {
            assert!(spin_matrices(s).is_err(), "{s}");
        }
        assert!(spin_matrices(40.0).is_err());
    }

    #[test]
    fn commutator_examples() {
        let sp = spin_matrices(1.5).unwrap();
        let r = commutator(&sp.sx, &sp.sy).unwrap() - &sp.sz * c(0.0, 1.0);
        assert!(frobenius(&r) < 1e-12);
        assert_eq!(frobenius(&commutator(&sp.identity(), &sp.sy).unwrap()), 0.0);
        let sz2 = &sp.sz * &sp.sz;
        assert_eq!(frobenius(&commutator(&sp.sz, &sz2).unwrap()), 0.0);
        assert!(commutator(&sp.sz, &identity(3)).is_err());
    }

    #[test]
    fn anticommutator_examples() {
        let sp = spin_matrices(1.5).unwrap();
        let a = anticommutator(&sp.sx, &sp.sz).unwrap();
        // direct multiplication oracle
        let direct = &sp.sx * &sp.sz + &sp.sz * &sp.sx;
        assert_eq!(a, direct);
        assert!(hermiticity_residual(&a) < 1e-12);
        for k in 0..4 {
            assert_eq!(a[(k, k)].norm(), 0.0);
        }
        let twice = anticommutator(&sp.identity(), &sp.sy).unwrap();
        assert!(frobenius(&(twice - &sp.sy * c(2.0, 0.0))) < 1e-15);
        assert_eq!(frobenius(&anticommutator(&sp.sy, &linalg::zeros(4)).unwrap()), 0.0);
        assert!(anticommutator(&sp.sz, &identity(2)).is_err());
    }

    #[test]
    fn named_hamiltonians() {
        let sp = spin_matrices(1.5).unwrap();
        let h = build_hamiltonian(&OperatorSpec::named("both_symmetric"), &sp).unwrap();
        let diag: Vec<f64> = (0..4).map(|k| h[(k, k)].re).collect();
        assert_eq!(diag, vec![2.25, 0.25, 0.25, 2.25]);
        for name in HamiltonianName::ALL {
            let h = build_hamiltonian(&OperatorSpec::named(name.as_str()).with_scale(1.7), &sp).unwrap();
            assert!(hermiticity_residual(&h) < 1e-12, "{name}");
        }
        assert!(build_hamiltonian(&OperatorSpec::named("nope"), &sp).is_err());
    }

    #[test]
    fn literal_hamiltonian_validation() {
        let sp = spin_matrices(0.5).unwrap();
        let mut m = linalg::zeros(2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(build_hamiltonian(&OperatorSpec::literal(m.clone()), &sp).is_err());
        m[(1, 0)] = c(1.0, 0.0);
        let h = build_hamiltonian(&OperatorSpec::literal(m).with_scale(2.0), &sp).unwrap();
        assert_eq!(h[(0, 1)], c(2.0, 0.0));
        assert!(build_hamiltonian(&OperatorSpec::literal(identity(3)), &sp).is_err());
    }

    #[test]
    fn coupling_catalog_resolves_every_name() {
        let sp = spin_matrices(1.5).unwrap();
        for name in CouplingName::ALL {
            let o = build_coupling(&OperatorSpec::named(name.as_str()), &sp).unwrap();
            assert_eq!(o.nrows(), 4);
            assert_eq!(name.as_str().parse::<CouplingName>().unwrap(), name);
        }
        let sz = build_coupling(&OperatorSpec::named("sz"), &sp).unwrap();
        assert_eq!(sz, sp.sz);
        let isz = build_coupling(&OperatorSpec::named("i_sz"), &sp).unwrap();
        assert!(frobenius(&(&isz + isz.adjoint())) < 1e-15);
        assert!(build_coupling(&OperatorSpec::named("Sz"), &sp).is_err());
    }
}
