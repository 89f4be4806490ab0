//! Superoperator representations on N qubits.
//!
//! Pauli transfer matrices live in the normalized Pauli basis `P/sqrt(d)`, so
//! the identity channel is the identity matrix and `R[Q][P]` is the
//! coefficient of `Q` in `G[P]`. Chi matrices use the Choi-sum convention
//! `G[rho] = sum chi[P][Q] P rho Q` with unnormalized Paulis.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::pauli::{all_paulis, PauliString, DENSE_LIMIT};

/// Top-row / left-column tolerance for TP and unital flags.
pub const TP_TOL: f64 = 1e-9;
/// Minimum Choi eigenvalue still counted as completely positive.
pub const CP_TOL: f64 = 1e-9;
/// Hermiticity tolerance for chi matrices.
pub const HERMITIAN_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

pub(crate) fn check_dense(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::InvalidQubitCount(0));
    }
    if n_qubits > DENSE_LIMIT {
        return Err(Error::DenseLimit { n_qubits, limit: DENSE_LIMIT });
    }
    Ok(())
}

pub(crate) fn superop_dim(n_qubits: usize) -> usize {
    1usize << (2 * n_qubits)
}

/// A real `4^N x 4^N` superoperator in the normalized Pauli basis.
///
/// Used both for processes and for error generators (which are not
/// processes but share the shape and basis).
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessMatrix {
    n_qubits: usize,
    matrix: DMatrix<f64>,
}

impl ProcessMatrix {
    pub fn new(n_qubits: usize, matrix: DMatrix<f64>) -> Result<Self> {
        check_dense(n_qubits)?;
        let dim = superop_dim(n_qubits);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::BadShape { rows: matrix.nrows(), cols: matrix.ncols(), expected: dim });
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse("process matrix has non-finite entries".into()));
        }
        Ok(ProcessMatrix { n_qubits, matrix })
    }

    pub fn identity(n_qubits: usize) -> Result<Self> {
        check_dense(n_qubits)?;
        let dim = superop_dim(n_qubits);
        Ok(ProcessMatrix { n_qubits, matrix: DMatrix::identity(dim, dim) })
    }

    pub fn zeros(n_qubits: usize) -> Result<Self> {
        check_dense(n_qubits)?;
        let dim = superop_dim(n_qubits);
        Ok(ProcessMatrix { n_qubits, matrix: DMatrix::zeros(dim, dim) })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn entry(&self, row: &PauliString, col: &PauliString) -> f64 {
        self.matrix[(row.dense_index(), col.dense_index())]
    }

    pub(crate) fn same_width(&self, other: &ProcessMatrix) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch { left: self.n_qubits, right: other.n_qubits });
        }
        Ok(())
    }

    /// `self` applied after `first`.
    pub fn compose(&self, first: &ProcessMatrix) -> Result<ProcessMatrix> {
        self.same_width(first)?;
        Ok(ProcessMatrix { n_qubits: self.n_qubits, matrix: &self.matrix * &first.matrix })
    }

    pub fn inverse(&self) -> Result<ProcessMatrix> {
        Ok(ProcessMatrix { n_qubits: self.n_qubits, matrix: linalg::inverse(&self.matrix)? })
    }

    pub fn exp(&self) -> Result<ProcessMatrix> {
        Ok(ProcessMatrix { n_qubits: self.n_qubits, matrix: linalg::matrix_exp(&self.matrix)? })
    }

    pub fn log(&self) -> Result<ProcessMatrix> {
        Ok(ProcessMatrix { n_qubits: self.n_qubits, matrix: linalg::matrix_log(&self.matrix)? })
    }

    pub fn scaled(&self, factor: f64) -> ProcessMatrix {
        ProcessMatrix { n_qubits: self.n_qubits, matrix: &self.matrix * factor }
    }

    pub fn add(&self, other: &ProcessMatrix) -> Result<ProcessMatrix> {
        self.same_width(other)?;
        Ok(ProcessMatrix { n_qubits: self.n_qubits, matrix: &self.matrix + &other.matrix })
    }

    pub fn sub(&self, other: &ProcessMatrix) -> Result<ProcessMatrix> {
        self.same_width(other)?;
        Ok(ProcessMatrix { n_qubits: self.n_qubits, matrix: &self.matrix - &other.matrix })
    }

    /// Largest deviation of the top row from `[1, 0, ..., 0]`.
    pub fn tp_deviation(&self) -> f64 {
        self.row_deviation(1.0)
    }

    /// Largest entry of the top row; a TP generator has an all-zero top row.
    pub fn generator_tp_deviation(&self) -> f64 {
        self.row_deviation(0.0)
    }

    fn row_deviation(&self, corner: f64) -> f64 {
        let row = self.matrix.row(0);
        row.iter().enumerate().map(|(j, v)| if j == 0 { (v - corner).abs() } else { v.abs() }).fold(0.0, f64::max)
    }

    pub fn unital_deviation(&self) -> f64 {
        let col = self.matrix.column(0);
        col.iter().enumerate().map(|(i, v)| if i == 0 { (v - 1.0).abs() } else { v.abs() }).fold(0.0, f64::max)
    }

    pub fn frobenius_distance(&self, other: &ProcessMatrix) -> Result<f64> {
        self.same_width(other)?;
        Ok((&self.matrix - &other.matrix).norm())
    }

    /// Hilbert-Schmidt inner product `Tr(A^T B)`.
    pub fn hs_inner(&self, other: &ProcessMatrix) -> Result<f64> {
        self.same_width(other)?;
        Ok(self.matrix.dot(&other.matrix))
    }
}

/// One Choi unit `coeff * (left . rho . right)`.
#[derive(Clone, Copy, Debug)]
pub struct ChoiTerm {
    pub coeff: Complex64,
    pub left: PauliString,
    pub right: PauliString,
}

impl ChoiTerm {
    pub fn new(coeff: Complex64, left: PauliString, right: PauliString) -> Self {
        ChoiTerm { coeff, left, right }
    }

    /// Image of the `col`-th basis Pauli: `(row, value)` with
    /// `left P_col right = value P_row`.
    pub(crate) fn column_entry(&self, col: &PauliString) -> (usize, Complex64) {
        let a = self.left.product_unchecked(col);
        let b = a.pauli.product_unchecked(&self.right);
        let phase = (a.phase * b.phase).to_complex();
        (b.pauli.dense_index(), self.coeff * phase)
    }
}

/// Sparse entries `(row, col, value)` of a Choi sum in the normalized PTM.
///
/// Imaginary parts must cancel for Hermiticity-preserving sums; the caller
/// decides what to do with any residue.
pub(crate) fn choi_sum_entries(n_qubits: usize, terms: &[ChoiTerm]) -> Vec<(usize, usize, Complex64)> {
    let paulis = all_paulis(n_qubits);
    let mut out = Vec::with_capacity(terms.len() * paulis.len());
    for (col, p) in paulis.iter().enumerate() {
        for t in terms {
            let (row, v) = t.column_entry(p);
            out.push((row, col, v));
        }
    }
    out
}

/// Real PTM of a Hermiticity-preserving Choi sum.
pub fn ptm_from_choi_terms(n_qubits: usize, terms: &[ChoiTerm]) -> Result<ProcessMatrix> {
    check_dense(n_qubits)?;
    let dim = superop_dim(n_qubits);
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for (r, c, v) in choi_sum_entries(n_qubits, terms) {
        m[(r, c)] += v;
    }
    let residue = m.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    if residue > 1e-12 {
        return Err(Error::Parse(format!("Choi sum does not preserve Hermiticity (imaginary residue {residue:.3e})")));
    }
    ProcessMatrix::new(n_qubits, m.map(|v| v.re))
}

/// Complex Hermitian chi matrix indexed by Pauli pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct ChiMatrix {
    n_qubits: usize,
    matrix: DMatrix<Complex64>,
}

impl ChiMatrix {
    pub fn new(n_qubits: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        check_dense(n_qubits)?;
        let dim = superop_dim(n_qubits);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::BadShape { rows: matrix.nrows(), cols: matrix.ncols(), expected: dim });
        }
        let dev = (&matrix - matrix.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
        if dev > HERMITIAN_TOL {
            return Err(Error::NonHermitian(dev));
        }
        Ok(ChiMatrix { n_qubits, matrix })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

pub fn ptm_from_chi(chi: &ChiMatrix) -> Result<ProcessMatrix> {
    let n = chi.n_qubits;
    let paulis = all_paulis(n);
    let mut terms = Vec::new();
    for (i, p) in paulis.iter().enumerate() {
        for (j, q) in paulis.iter().enumerate() {
            let c = chi.matrix[(i, j)];
            if c != ZERO {
                terms.push(ChoiTerm::new(c, *p, *q));
            }
        }
    }
    let dim = superop_dim(n);
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for (r, c, v) in choi_sum_entries(n, &terms) {
        m[(r, c)] += v;
    }
    // Hermitian chi gives a real PTM up to rounding.
    ProcessMatrix::new(n, m.map(|v| v.re))
}

/// Choi units are orthogonal with squared norm `d^2`, so
/// `chi[P][Q] = <X_{P,Q}, G> / d^2`.
pub fn chi_from_ptm(ptm: &ProcessMatrix) -> Result<ChiMatrix> {
    let n = ptm.n_qubits;
    let paulis = all_paulis(n);
    let dim = paulis.len();
    let d2 = dim as f64;
    let mut chi = DMatrix::<Complex64>::zeros(dim, dim);
    for (i, p) in paulis.iter().enumerate() {
        for (j, q) in paulis.iter().enumerate() {
            let unit = ChoiTerm::new(Complex64::new(1.0, 0.0), *p, *q);
            let mut acc = ZERO;
            for (col, basis) in paulis.iter().enumerate() {
                let (row, v) = unit.column_entry(basis);
                acc += v.conj() * ptm.matrix[(row, col)];
            }
            chi[(i, j)] = acc / d2;
        }
    }
    // Symmetrize away rounding before the Hermiticity check.
    let sym = (&chi + chi.adjoint()) * Complex64::new(0.5, 0.0);
    ChiMatrix::new(n, sym)
}

/// Coefficient `<X_{P,Q}, op> / d^2` for a single Choi unit, without
/// building the whole chi matrix.
pub fn chi_entry(op: &ProcessMatrix, p: &PauliString, q: &PauliString) -> Complex64 {
    let paulis = all_paulis(op.n_qubits);
    let unit = ChoiTerm::new(Complex64::new(1.0, 0.0), *p, *q);
    let mut acc = ZERO;
    for (col, basis) in paulis.iter().enumerate() {
        let (row, v) = unit.column_entry(basis);
        acc += v.conj() * op.matrix[(row, col)];
    }
    acc / paulis.len() as f64
}

/// Dense `(op (x) 1)[|Psi><Psi|]` on system (x) ancilla, system first.
#[derive(Clone, Debug, PartialEq)]
pub struct JamiolkowskiOperator {
    n_qubits: usize,
    matrix: DMatrix<Complex64>,
}

impl JamiolkowskiOperator {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// The maximally entangled vector `sum_i |ii> / sqrt(d)`.
    pub fn psi(n_qubits: usize) -> nalgebra::DVector<Complex64> {
        let d = 1usize << n_qubits;
        let mut v = nalgebra::DVector::zeros(d * d);
        let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        for i in 0..d {
            v[i * d + i] = amp;
        }
        v
    }

    pub fn psi_expectation(&self) -> Complex64 {
        let psi = Self::psi(self.n_qubits);
        (psi.adjoint() * &self.matrix * &psi)[(0, 0)]
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Uses `|Psi><Psi| = sum_P P (x) P^T / d^2`, so the state is
/// `sum_{P,Q} R[Q][P] Q (x) P^T / d^2`.
pub fn jamiolkowski(op: &ProcessMatrix) -> Result<JamiolkowskiOperator> {
    let n = op.n_qubits;
    check_dense(n)?;
    let d = 1usize << n;
    let paulis = all_paulis(n);
    let norm = 1.0 / (d * d) as f64;
    let mut m = DMatrix::<Complex64>::zeros(d * d, d * d);
    // Column actions of every Pauli on computational states, cached.
    let actions: Vec<Vec<(Complex64, usize)>> =
        paulis.iter().map(|p| (0..d).map(|k| p.apply_to_basis(k)).collect()).collect();
    for (pi, _) in paulis.iter().enumerate() {
        for (qi, _) in paulis.iter().enumerate() {
            let r = op.matrix[(qi, pi)];
            if r == 0.0 {
                continue;
            }
            let w = r * norm;
            for a in 0..d {
                let (qa, a2) = actions[qi][a];
                for b in 0..d {
                    // P^T = conj(P) for Hermitian P.
                    let (pb, b2) = actions[pi][b];
                    m[(a2 * d + b2, a * d + b)] += qa * pb.conj() * w;
                }
            }
        }
    }
    Ok(JamiolkowskiOperator { n_qubits: n, matrix: m })
}

/// Channel diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProcessDiagnostics {
    pub is_tp: bool,
    pub is_unital: bool,
    pub is_cp: bool,
    pub min_choi_eigenvalue: f64,
    pub distance_to_identity: f64,
    pub tp_deviation: f64,
    pub unital_deviation: f64,
}

impl ProcessDiagnostics {
    pub fn is_cptp(&self) -> bool {
        self.is_tp && self.is_cp
    }
}

/// TP/unital flags use [`TP_TOL`]; CP uses [`CP_TOL`] on the chi spectrum,
/// which equals the Jamiolkowski spectrum.
pub fn check_process(ptm: &ProcessMatrix) -> Result<ProcessDiagnostics> {
    let chi = chi_from_ptm(ptm)?;
    let min_eig = chi.eigenvalues().first().copied().unwrap_or(0.0);
    let tp_dev = ptm.tp_deviation();
    let un_dev = ptm.unital_deviation();
    Ok(ProcessDiagnostics {
        is_tp: tp_dev <= TP_TOL,
        is_unital: un_dev <= TP_TOL,
        is_cp: min_eig >= -CP_TOL,
        min_choi_eigenvalue: min_eig,
        distance_to_identity: ptm.frobenius_distance(&ProcessMatrix::identity(ptm.n_qubits)?)?,
        tp_deviation: tp_dev,
        unital_deviation: un_dev,
    })
}

fn unitary_qubits(u: &DMatrix<Complex64>) -> Result<usize> {
    if u.nrows() != u.ncols() {
        return Err(Error::NotSquare { rows: u.nrows(), cols: u.ncols() });
    }
    let d = u.nrows();
    if d < 2 || !d.is_power_of_two() {
        return Err(Error::Parse(format!("operator dimension {d} is not 2^N")));
    }
    Ok(d.trailing_zeros() as usize)
}

/// `R[i][j] = Tr(P_i K P_j K^dag) / d` summed over Kraus operators.
pub fn ptm_from_kraus(kraus: &[DMatrix<Complex64>]) -> Result<ProcessMatrix> {
    let first = kraus.first().ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
    let n = unitary_qubits(first)?;
    check_dense(n)?;
    let d = 1usize << n;
    if kraus.iter().any(|k| k.shape() != (d, d)) {
        return Err(Error::InvalidChannel("Kraus operators differ in shape".into()));
    }
    let paulis = all_paulis(n);
    let dim = paulis.len();
    let mut out = DMatrix::<f64>::zeros(dim, dim);
    for (j, pj) in paulis.iter().enumerate() {
        let pm = pj.dense_matrix()?;
        let mut image = DMatrix::<Complex64>::zeros(d, d);
        for k in kraus {
            image += k * &pm * k.adjoint();
        }
        for (i, pi) in paulis.iter().enumerate() {
            // Tr(P_i M) = sum_l ph M[l][l'] where P_i|l> = ph |l'>.
            let mut tr = ZERO;
            for l in 0..d {
                let (ph, l2) = pi.apply_to_basis(l);
                tr += ph * image[(l, l2)];
            }
            out[(i, j)] = tr.re / d as f64;
        }
    }
    ProcessMatrix::new(n, out)
}

pub fn ptm_from_unitary(u: &DMatrix<Complex64>) -> Result<ProcessMatrix> {
    ptm_from_kraus(std::slice::from_ref(u))
}
