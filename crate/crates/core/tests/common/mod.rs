//! Dense reference implementations used as oracles by the integration
//! tests. Everything here works from explicit 2^N x 2^N matrices and the
//! literal operator formulas, without the crate's Choi-sum machinery.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn letter(ch: char) -> CMatrix {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match ch {
        'I' => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        'X' => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        'Y' => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        'Z' => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => panic!("bad letter {ch}"),
    }
}

/// Pauli text, leftmost letter is the most significant tensor factor.
pub fn dense(text: &str) -> CMatrix {
    text.chars().fold(DMatrix::identity(1, 1), |acc, ch| acc.kronecker(&letter(ch)))
}

/// Canonical text of the Pauli with base-4 index `k` on `n` qubits.
pub fn pauli_text(n: usize, k: usize) -> String {
    (0..n).map(|q| ['I', 'X', 'Y', 'Z'][(k >> (2 * (n - 1 - q))) & 3]).collect()
}

pub fn all_texts(n: usize) -> Vec<String> {
    (0..1usize << (2 * n)).map(|k| pauli_text(n, k)).collect()
}

/// PTM of a linear map on operators, normalized Pauli basis:
/// `R[i][j] = Re Tr(P_i f(P_j)) / d`.
pub fn ptm_of_map(n: usize, f: impl Fn(&CMatrix) -> CMatrix) -> DMatrix<f64> {
    let ps: Vec<CMatrix> = all_texts(n).iter().map(|t| dense(t)).collect();
    let d = (1usize << n) as f64;
    let dim = ps.len();
    let images: Vec<CMatrix> = ps.iter().map(&f).collect();
    DMatrix::from_fn(dim, dim, |i, j| (&ps[i] * &images[j]).trace().re / d)
}

fn comm(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

fn anti(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

/// Literal action of an elementary generator on `rho`.
pub fn generator_action(kind: char, p: &str, q: Option<&str>, rho: &CMatrix) -> CMatrix {
    let pm = dense(p);
    let i = c(0.0, 1.0);
    match kind {
        'H' => comm(&pm, rho) * (-i),
        'S' => &pm * rho * &pm - rho,
        'C' => {
            let qm = dense(q.unwrap());
            &pm * rho * &qm + &qm * rho * &pm - anti(&anti(&pm, &qm), rho) * c(0.5, 0.0)
        }
        'A' => {
            let qm = dense(q.unwrap());
            (&pm * rho * &qm - &qm * rho * &pm + anti(&comm(&pm, &qm), rho) * c(0.5, 0.0)) * i
        }
        _ => panic!("bad kind {kind}"),
    }
}

pub fn generator_ptm(kind: char, p: &str, q: Option<&str>) -> DMatrix<f64> {
    ptm_of_map(p.len(), |rho| generator_action(kind, p, q, rho))
}

pub fn unitary_ptm(u: &CMatrix) -> DMatrix<f64> {
    let n = u.nrows().trailing_zeros() as usize;
    ptm_of_map(n, |rho| u * rho * u.adjoint())
}

/// Haar-distributed unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> CMatrix {
    let mut g = || -> f64 { rng.sample(StandardNormal) };
    let z = DMatrix::from_fn(d, d, |_, _| c(g(), g()));
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_diagonal(&DVector::from_fn(d, |k, _| {
        let v = r[(k, k)];
        v / v.norm()
    }));
    q * phases
}

/// Operator `L(X)` for a PTM `L`, by expanding `X` in Paulis.
pub fn apply_ptm(n: usize, l: &DMatrix<f64>, x: &CMatrix) -> CMatrix {
    let ps: Vec<CMatrix> = all_texts(n).iter().map(|t| dense(t)).collect();
    let d = (1usize << n) as f64;
    let coeffs: Vec<Complex64> = ps.iter().map(|p| (p * x).trace() / d.sqrt()).collect();
    let mut out = CMatrix::zeros(1 << n, 1 << n);
    for (i, p) in ps.iter().enumerate() {
        let mut v = c(0.0, 0.0);
        for (j, cj) in coeffs.iter().enumerate() {
            v += *cj * l[(i, j)];
        }
        out += p * (v / d.sqrt());
    }
    out
}

/// `(L (x) 1)|Psi><Psi|` built from the action on `|i><j|`.
pub fn jamiolkowski_dense(n: usize, l: &DMatrix<f64>) -> CMatrix {
    let d = 1usize << n;
    let mut out = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let mut eij = CMatrix::zeros(d, d);
            eij[(i, j)] = c(1.0, 0.0);
            let img = apply_ptm(n, l, &eij);
            out += img.kronecker(&eij) / c(d as f64, 0.0);
        }
    }
    out
}

pub fn psi(n: usize) -> DVector<Complex64> {
    let d = 1usize << n;
    let mut v = DVector::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = c(1.0 / (d as f64).sqrt(), 0.0);
    }
    v
}

/// `(epsilon_J, theta_J)` straight from the definitions.
pub fn j_metrics_dense(n: usize, l: &DMatrix<f64>) -> (f64, f64) {
    let rho = jamiolkowski_dense(n, l);
    let v = psi(n);
    let rv = &rho * &v;
    let overlap = (v.adjoint() * &rv)[(0, 0)];
    let perp = &rv - &v * overlap;
    (-overlap.re, perp.norm())
}

/// Minimum eigenvalue of the Jamiolkowski state, computed densely.
pub fn min_choi_eigenvalue_dense(n: usize, ptm: &DMatrix<f64>) -> f64 {
    let rho = jamiolkowski_dense(n, ptm);
    let h = (&rho + rho.adjoint()) * c(0.5, 0.0);
    nalgebra::SymmetricEigen::new(h).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}
