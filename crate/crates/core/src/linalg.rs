//! Real matrix exponential and principal logarithm.
//!
//! `matrix_exp` is Padé(13) scaling and squaring. `matrix_log` reduces the
//! input to complex Schur form, takes repeated triangular square roots until
//! the factor is close to the identity, evaluates a Gauss-Legendre
//! partial-fraction Padé approximant of `log(I + X)` and scales back up. The
//! result is returned only if it is real to within [`IMAG_RESIDUE_TOL`].

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest imaginary residue tolerated when recombining a logarithm.
pub const IMAG_RESIDUE_TOL: f64 = 1e-8;

/// Relative distance from the negative real axis under which an eigenvalue is
/// treated as lying on it.
const BRANCH_CUT_TOL: f64 = 1e-10;

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
const THETA13: f64 = 5.371920351148152;

pub(crate) fn norm1<T: nalgebra::ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.clone().abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn check_square<T: nalgebra::Scalar>(a: &DMatrix<T>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    Ok(())
}

pub fn matrix_exp(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_square(a)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(a.clone());
    }
    let norm = norm1(a);
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a / 2f64.powi(s);
    let b = &PADE13;
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]) + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &id * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]) + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &id * b[0];
    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut r = lhs.lu().solve(&rhs).ok_or(Error::Singular)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 1..=m {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push(((x + 1.0) / 2.0, w / 2.0));
    }
    out
}

/// Principal square root of an upper-triangular matrix.
fn sqrtm_upper(t: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = t.nrows();
    let mut u = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        u[(j, j)] = t[(j, j)].sqrt();
        for i in (0..j).rev() {
            let mut s = t[(i, j)];
            for k in i + 1..j {
                s -= u[(i, k)] * u[(k, j)];
            }
            u[(i, j)] = s / (u[(i, i)] + u[(j, j)]);
        }
    }
    u
}

/// Principal logarithm of an upper-triangular matrix with no eigenvalues on
/// the closed negative real axis.
fn logm_upper(t: DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let n = t.nrows();
    let id = DMatrix::<Complex64>::identity(n, n);
    let mut t = t;
    let mut roots = 0;
    while norm1(&(&t - &id)) > 0.25 {
        if roots >= 64 {
            return Err(Error::NoRealLogarithm("inverse scaling and squaring did not converge".into()));
        }
        t = sqrtm_upper(&t);
        roots += 1;
    }
    let x = &t - &id;
    let mut acc = DMatrix::<Complex64>::zeros(n, n);
    for (node, weight) in gauss_legendre(10) {
        let lhs = &id + &x * Complex64::new(node, 0.0);
        let y = lhs.solve_upper_triangular(&x).ok_or(Error::Singular)?;
        acc += y * Complex64::new(weight, 0.0);
    }
    Ok(acc * Complex64::new(2f64.powi(roots), 0.0))
}

/// Principal real logarithm.
///
/// Fails with [`Error::Singular`] for a zero eigenvalue and with
/// [`Error::NoRealLogarithm`] when an eigenvalue sits on the negative real
/// axis (the principal branch is undefined there) or when the recombined
/// result carries an imaginary part above [`IMAG_RESIDUE_TOL`].
pub fn matrix_log(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_square(a)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(a.clone());
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parse("matrix has non-finite entries".into()));
    }
    let scale = norm1(a).max(f64::MIN_POSITIVE);
    let c = a.map(|v| Complex64::new(v, 0.0));
    let schur = Schur::try_new(c, f64::EPSILON, 0)
        .ok_or(Error::NoRealLogarithm("Schur decomposition did not converge".into()))?;
    let (q, mut t) = schur.unpack();
    for j in 0..n {
        for i in j + 1..n {
            t[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    for k in 0..n {
        let lambda = t[(k, k)];
        if lambda.norm() <= 1e-13 * scale {
            return Err(Error::Singular);
        }
        if lambda.re < 0.0 && lambda.im.abs() <= BRANCH_CUT_TOL * lambda.norm() {
            return Err(Error::NoRealLogarithm(format!("eigenvalue {:.6} lies on the negative real axis", lambda.re)));
        }
    }
    let log_t = logm_upper(t)?;
    let full = &q * log_t * q.adjoint();
    let re = full.map(|v| v.re);
    let residue = full.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    if residue > IMAG_RESIDUE_TOL {
        return Err(Error::NoRealLogarithm(format!(
            "principal logarithm is complex (imaginary residue {residue:.3e})"
        )));
    }
    Ok(re)
}

/// Solve-based inverse for real square matrices.
pub fn inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_square(a)?;
    a.clone().try_inverse().ok_or(Error::Singular)
}
