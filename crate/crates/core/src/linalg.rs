//! Dense complex matrix helpers shared by every module, including the
//! scaling-and-squaring matrix exponential.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Dense square complex matrix used for operators, density matrices and
/// superoperators alike.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Largest Hilbert-space dimension accepted by the operator builders.
pub const MAX_DIM: usize = 64;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(n: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(n, n)
}

pub fn dagger(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint()
}

/// Frobenius norm. Every tolerance check in the crate goes through this.
pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.norm()
}

pub fn ensure_square(m: &ComplexMatrix, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(invalid(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Err(invalid(format!("{what} is empty")));
    }
    Ok(())
}

pub fn ensure_same_dim(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    ensure_square(a, "left operand")?;
    ensure_square(b, "right operand")?;
    if a.nrows() != b.nrows() {
        return Err(invalid(format!(
            "dimension mismatch: {} vs {}",
            a.nrows(),
            b.nrows()
        )));
    }
    Ok(())
}

pub fn ensure_finite(m: &ComplexMatrix, what: &str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(invalid(format!("{what} has non-finite entries")))
    }
}

/// `‖m − m†‖`.
pub fn hermiticity_residual(m: &ComplexMatrix) -> f64 {
    frobenius(&(m - m.adjoint()))
}

/// `(m + m†) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Maximum absolute column sum.
pub fn norm1(m: &ComplexMatrix) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Degree-m Padé coefficients and the 1-norm bounds below which each degree
/// meets double-precision backward error (Higham 2005).
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152e0;

/// Squarings beyond this mean the input norm exceeds ~1e300.
const MAX_SQUARINGS: u32 = 1024;

/// Matrix exponential by scaling and squaring with a diagonal Padé
/// approximant of degree 3 to 13.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_square(a, "expm input")?;
    ensure_finite(a, "expm input")?;
    let n = a.nrows();
    let norm = norm1(a);
    if norm == 0.0 {
        return Ok(identity(n));
    }

    for &(m, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            let (u, v) = pade_low(a, coeffs);
            return pade_solve(&u, &v);
        }
    }

    let s = (norm / THETA13).log2().ceil().max(0.0) as u32;
    if s > MAX_SQUARINGS {
        return Err(invalid(format!("expm input norm {norm:e} overflows")));
    }
    let scaled = a.scale(0.5f64.powi(s as i32));
    let (u, v) = pade13(&scaled);
    let mut r = pade_solve(&u, &v)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

fn pade_low(a: &ComplexMatrix, b: &[f64]) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.nrows();
    let a2 = a * a;
    let mut power = identity(n);
    let mut u_even = zeros(n);
    let mut v = zeros(n);
    for k in 0..b.len() / 2 {
        u_even += power.scale(b[2 * k + 1]);
        v += power.scale(b[2 * k]);
        power = &power * &a2;
    }
    (a * u_even, v)
}

fn pade13(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let b = &PADE13;
    let n = a.nrows();
    let id = identity(n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * (a6.scale(b[13]) + a4.scale(b[11]) + a2.scale(b[9]))
        + a6.scale(b[7])
        + a4.scale(b[5])
        + a2.scale(b[3])
        + id.scale(b[1]);
    let u = a * inner_u;
    let v = &a6 * (a6.scale(b[12]) + a4.scale(b[10]) + a2.scale(b[8]))
        + a6.scale(b[6])
        + a4.scale(b[4])
        + a2.scale(b[2])
        + id.scale(b[0]);
    (u, v)
}

fn pade_solve(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<ComplexMatrix> {
    let p = v + u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .ok_or_else(|| Error::Construction("singular Padé denominator in expm".into()))
}
