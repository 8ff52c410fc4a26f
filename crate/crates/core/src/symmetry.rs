//! Unitary groups, anti-unitary operators and the Schur-lemma
//! proportionality test.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, c, ensure_same_dim, frobenius, kron, ComplexMatrix};
use crate::operators::SpinTriple;

/// Entrywise tolerance for the group axioms.
pub const GROUP_TOL: f64 = 1e-12;

/// Finite group of unitary matrices with its multiplication table.
///
/// `cayley[a][b]` is the index of `elements[a] * elements[b]`.
#[derive(Debug, Clone)]
pub struct UnitaryGroup {
    elements: Vec<ComplexMatrix>,
    labels: Vec<String>,
    cayley: Vec<Vec<usize>>,
}

fn max_entry_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

impl UnitaryGroup {
    /// Builds the group from its elements, deriving the multiplication table
    /// and checking unitarity, closure and the presence of the identity.
    pub fn from_elements(elements: Vec<ComplexMatrix>, labels: Vec<String>) -> Result<Self> {
        if elements.is_empty() {
            return Err(invalid("group has no elements"));
        }
        if labels.len() != elements.len() {
            return Err(invalid("one label per element required"));
        }
        let n = elements[0].nrows();
        for (g, label) in elements.iter().zip(&labels) {
            linalg::ensure_square(g, "group element")?;
            if g.nrows() != n {
                return Err(invalid(format!("element {label} has the wrong dimension")));
            }
            let err = max_entry_diff(&(g * g.adjoint()), &linalg::identity(n));
            if err > GROUP_TOL {
                return Err(Error::Construction(format!("element {label} is not unitary ({err:e})")));
            }
        }
        let find = |m: &ComplexMatrix| elements.iter().position(|g| max_entry_diff(g, m) <= GROUP_TOL);
        if find(&linalg::identity(n)).is_none() {
            return Err(Error::Construction("identity is missing".into()));
        }
        let mut cayley = vec![vec![0; elements.len()]; elements.len()];
        for (a, ga) in elements.iter().enumerate() {
            for (b, gb) in elements.iter().enumerate() {
                cayley[a][b] = find(&(ga * gb)).ok_or_else(|| {
                    Error::Construction(format!("product {}·{} leaves the set", labels[a], labels[b]))
                })?;
            }
        }
        Ok(Self { elements, labels, cayley })
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn cayley(&self) -> &[Vec<usize>] {
        &self.cayley
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn identity_index(&self) -> usize {
        (0..self.order())
            .find(|&e| (0..self.order()).all(|a| self.cayley[e][a] == a))
            .expect("identity verified at construction")
    }

    pub fn inverse(&self, a: usize) -> usize {
        let e = self.identity_index();
        (0..self.order()).find(|&b| self.cayley[a][b] == e).expect("finite group has inverses")
    }

    /// Conjugacy classes, each sorted, ordered by their smallest index.
    pub fn conjugacy_classes(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.order()];
        let mut classes = Vec::new();
        for a in 0..self.order() {
            if seen[a] {
                continue;
            }
            let mut class: Vec<usize> = (0..self.order())
                .map(|g| self.cayley[self.cayley[g][a]][self.inverse(g)])
                .collect();
            class.sort_unstable();
            class.dedup();
            for &k in &class {
                seen[k] = true;
            }
            classes.push(class);
        }
        classes
    }

    /// Character of the representation on each conjugacy class.
    pub fn class_traces(&self) -> Vec<Complex64> {
        self.conjugacy_classes()
            .iter()
            .map(|class| self.elements[class[0]].trace())
            .collect()
    }
}

/// Quaternion labels in multiplication-table order.
pub const QUATERNION_LABELS: [&str; 8] = ["e", "ē", "i", "ī", "j", "j̄", "k", "k̄"];

/// Quaternion multiplication table over [`QUATERNION_LABELS`];
/// `QUATERNION_TABLE[a][b]` is the label index of `a·b`.
pub const QUATERNION_TABLE: [[usize; 8]; 8] = [
    [0, 1, 2, 3, 4, 5, 6, 7],
    [1, 0, 3, 2, 5, 4, 7, 6],
    [2, 3, 1, 0, 6, 7, 5, 4],
    [3, 2, 0, 1, 7, 6, 4, 5],
    [4, 5, 7, 6, 1, 0, 2, 3],
    [5, 4, 6, 7, 0, 1, 3, 2],
    [6, 7, 4, 5, 3, 2, 1, 0],
    [7, 6, 5, 4, 2, 3, 0, 1],
];

/// The quaternion group on a spin-3/2 space, with elements stored in
/// [`QUATERNION_LABELS`] order.
#[derive(Debug, Clone)]
pub struct QuaternionGroup {
    pub group: UnitaryGroup,
    /// For each label, the 1-based index of the reducible-representation
    /// matrix `Q1..Q8` it was assigned to.
    pub rep_index: [usize; 8],
}

impl QuaternionGroup {
    /// Human-readable label assignment, e.g. `e=Q1 ē=Q2 i=Q3 ...`.
    pub fn labeling(&self) -> String {
        QUATERNION_LABELS
            .iter()
            .zip(self.rep_index)
            .map(|(l, q)| format!("{l}=Q{q}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// `Q1..Q8` of the 4-dimensional representation built from Pauli matrices.
pub fn quaternion_rep_matrices() -> [ComplexMatrix; 8] {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    let id2 = linalg::identity(2);
    let sx = ComplexMatrix::from_row_slice(2, 2, &[z, one, one, z]);
    let sy = ComplexMatrix::from_row_slice(2, 2, &[z, -i, i, z]);
    let sz = ComplexMatrix::from_row_slice(2, 2, &[one, z, z, -one]);
    let q1 = kron(&id2, &id2);
    let q3 = -kron(&id2, &(&sz * i));
    let q5 = -kron(&(&sx * i), &sy);
    let q7 = -kron(&(&sx * i), &sx);
    [q1.clone(), -q1, q3.clone(), -q3, q5.clone(), -q5, q7.clone(), -q7]
}

/// Assigns `Q1..Q8` to the quaternion labels so that the multiplication
/// table holds. The printed assignment `i=Q3, j=Q5, k=Q7` is tried first,
/// then sign relabelings, flipping `k` before `j` before `i`.
pub fn quaternion_group(spins: &SpinTriple) -> Result<QuaternionGroup> {
    if spins.dim() != 4 {
        return Err(invalid(format!("quaternion representation needs dim 4, got {}", spins.dim())));
    }
    let reps = quaternion_rep_matrices();
    for flips in [0u8, 4, 2, 1, 6, 5, 3, 7] {
        let pick = |base: usize, bit: u8| if flips & bit == 0 { (base, base + 1) } else { (base + 1, base) };
        let (i, ib) = pick(2, 1);
        let (j, jb) = pick(4, 2);
        let (k, kb) = pick(6, 4);
        let order = [0, 1, i, ib, j, jb, k, kb];
        let elements: Vec<ComplexMatrix> = order.iter().map(|&q| reps[q].clone()).collect();
        let satisfies = (0..8).all(|a| {
            (0..8).all(|b| max_entry_diff(&(&elements[a] * &elements[b]), &elements[QUATERNION_TABLE[a][b]]) <= GROUP_TOL)
        });
        if !satisfies {
            continue;
        }
        let labels = QUATERNION_LABELS.iter().map(|s| s.to_string()).collect();
        let group = UnitaryGroup::from_elements(elements, labels)?;
        if group.cayley().iter().zip(QUATERNION_TABLE.iter()).any(|(row, want)| row.as_slice() != want) {
            return Err(Error::Construction("derived table disagrees with the quaternion table".into()));
        }
        let mut rep_index = [0; 8];
        for (slot, q) in rep_index.iter_mut().zip(order) {
            *slot = q + 1;
        }
        return Ok(QuaternionGroup { group, rep_index });
    }
    Err(Error::Construction("no sign labeling satisfies the quaternion table".into()))
}

/// Anti-unitary operator `T = U·K`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntiUnitaryOp {
    u: ComplexMatrix,
}

impl AntiUnitaryOp {
    pub fn new(u: ComplexMatrix) -> Result<Self> {
        linalg::ensure_square(&u, "anti-unitary part")?;
        let n = u.nrows();
        let err = frobenius(&(&u * u.adjoint() - linalg::identity(n)));
        if err > 1e-12 * (n as f64).sqrt() {
            return Err(Error::Construction(format!("unitary part is not unitary ({err:e})")));
        }
        Ok(Self { u })
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.u
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    /// `T A T⁻¹ = U A* U†`.
    pub fn conjugate_operator(&self, a: &ComplexMatrix) -> ComplexMatrix {
        &self.u * a.conjugate() * self.u.adjoint()
    }

    /// `T v = U v*`.
    pub fn apply(&self, v: &nalgebra::DVector<Complex64>) -> nalgebra::DVector<Complex64> {
        &self.u * v.conjugate()
    }

    /// Matrix of `T²`, i.e. `U U*`.
    pub fn square(&self) -> ComplexMatrix {
        &self.u * self.u.conjugate()
    }
}

/// Time reversal `T = exp(−iπ Sy)·K`, checked to invert all three spin
/// components.
pub fn time_reversal(spins: &SpinTriple) -> Result<AntiUnitaryOp> {
    let u = linalg::expm(&(&spins.sy * c(0.0, -std::f64::consts::PI)))?;
    let t = AntiUnitaryOp::new(u)?;
    for (name, s) in [("Sx", &spins.sx), ("Sy", &spins.sy), ("Sz", &spins.sz)] {
        let r = frobenius(&(t.conjugate_operator(s) + s));
        if r >= 1e-10 {
            return Err(Error::Construction(format!("T does not invert {name} (residual {r:e})")));
        }
    }
    Ok(t)
}

/// `max_k ‖[o, g_k]‖ < tol`.
pub fn commutes_with_unitary(o: &ComplexMatrix, g: &UnitaryGroup, tol: f64) -> Result<bool> {
    Ok(max_group_commutator(o, g)? < tol)
}

pub fn max_group_commutator(o: &ComplexMatrix, g: &UnitaryGroup) -> Result<f64> {
    linalg::ensure_square(o, "operator")?;
    if o.nrows() != g.dim() {
        return Err(invalid(format!("operator dim {} vs group dim {}", o.nrows(), g.dim())));
    }
    Ok(g.elements().iter().map(|q| frobenius(&(o * q - q * o))).fold(0.0, f64::max))
}

/// `‖U o* U† − o‖ < tol`.
pub fn commutes_with_antiunitary(o: &ComplexMatrix, t: &AntiUnitaryOp, tol: f64) -> Result<bool> {
    Ok(antiunitary_residual(o, t)? < tol)
}

pub fn antiunitary_residual(o: &ComplexMatrix, t: &AntiUnitaryOp) -> Result<f64> {
    ensure_same_dim(o, t.unitary())?;
    Ok(frobenius(&(t.conjugate_operator(o) - o)))
}

pub fn is_hermitian(o: &ComplexMatrix, tol: f64) -> bool {
    o.nrows() == o.ncols() && linalg::hermiticity_residual(o) < tol
}

/// Outcome of a "proportional to the identity" test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProportionalityReport {
    pub proportional: bool,
    pub coefficient: Complex64,
    pub residual: f64,
}

/// Checks whether `Π o Π` is a scalar multiple of `Π`.
///
/// The coefficient is `tr(Π o Π) / rank(Π)` and the residual is
/// `‖Π o Π − coefficient·Π‖`.
pub fn schur_test(o: &ComplexMatrix, projector: &ComplexMatrix, tol: f64) -> Result<ProportionalityReport> {
    ensure_same_dim(o, projector)?;
    let p = projector;
    if linalg::hermiticity_residual(p) >= 1e-10 {
        return Err(invalid("projector is not Hermitian"));
    }
    if frobenius(&(p * p - p)) >= 1e-10 {
        return Err(invalid("projector is not idempotent"));
    }
    let rank = p.trace().re.round();
    if rank < 1.0 {
        return Err(invalid("projector has rank zero"));
    }
    let restricted = p * o * p;
    let coefficient = restricted.trace() / rank;
    let residual = frobenius(&(&restricted - p * coefficient));
    Ok(ProportionalityReport { proportional: residual < tol, coefficient, residual })
}

/// Hermiticity and symmetry flags of a coupling operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct OperatorSignature {
    pub hermitian: bool,
    pub time_reversal: bool,
    pub quaternion: bool,
}

impl OperatorSignature {
    pub fn of(o: &ComplexMatrix, q: &UnitaryGroup, t: &AntiUnitaryOp, tol: f64) -> Result<Self> {
        Ok(Self {
            hermitian: is_hermitian(o, tol),
            time_reversal: commutes_with_antiunitary(o, t, tol)?,
            quaternion: commutes_with_unitary(o, q, tol)?,
        })
    }
}
