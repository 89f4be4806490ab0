//! Exact N-qubit Pauli arithmetic in symplectic form.
//!
//! A Pauli string stores one x bit and one z bit per qubit (bit `q` of each
//! mask is qubit `q`). Single-qubit letters map as I=(0,0), X=(1,0), Y=(1,1),
//! Z=(0,1). The canonical index is a base-4 number with qubit 0 as the most
//! significant digit and I<X<Y<Z, so for two qubits `IZ` is 3 and `XI` is 4.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register for which dense `2^N x 2^N` operators and `4^N x 4^N`
/// superoperators are built.
pub const DENSE_LIMIT: usize = 5;

/// Widest register a [`PauliString`] can hold.
pub const MAX_QUBITS: usize = 64;

/// A power of `i`: `i^k` for `k` in `0..4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: u32) -> Self {
        Phase((k % 4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn inverse(self) -> Self {
        Phase((4 - self.0) % 4)
    }

    pub fn is_real(self) -> bool {
        self.0.is_multiple_of(2)
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            0 => "+1",
            1 => "+i",
            2 => "-1",
            _ => "-i",
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x: u64,
    z: u64,
}

impl PauliString {
    fn mask(n_qubits: usize) -> u64 {
        if n_qubits == 64 {
            u64::MAX
        } else {
            (1u64 << n_qubits) - 1
        }
    }

    fn check_width(n_qubits: usize) -> Result<()> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidQubitCount(n_qubits));
        }
        Ok(())
    }

    pub fn identity(n_qubits: usize) -> Result<Self> {
        Self::check_width(n_qubits)?;
        Ok(PauliString { n_qubits, x: 0, z: 0 })
    }

    pub fn from_bits(n_qubits: usize, x: u64, z: u64) -> Result<Self> {
        Self::check_width(n_qubits)?;
        let m = Self::mask(n_qubits);
        if x & !m != 0 || z & !m != 0 {
            return Err(Error::Parse(format!("bit masks {x:#x}/{z:#x} exceed {n_qubits} qubits")));
        }
        Ok(PauliString { n_qubits, x, z })
    }

    /// Inverse of [`PauliString::index`].
    pub fn from_index(n_qubits: usize, index: u128) -> Result<Self> {
        Self::check_width(n_qubits)?;
        if n_qubits < 64 && index >= 1u128 << (2 * n_qubits) {
            return Err(Error::Parse(format!("Pauli index {index} out of range for {n_qubits} qubits")));
        }
        let (mut x, mut z) = (0u64, 0u64);
        let mut rest = index;
        for q in (0..n_qubits).rev() {
            let (xb, zb) = letter_bits((rest & 3) as u8);
            x |= (xb as u64) << q;
            z |= (zb as u64) << q;
            rest >>= 2;
        }
        Ok(PauliString { n_qubits, x, z })
    }

    /// Pauli acting as `letter` on `qubit` and identity elsewhere.
    pub fn single(n_qubits: usize, qubit: usize, letter: char) -> Result<Self> {
        Self::check_width(n_qubits)?;
        if qubit >= n_qubits {
            return Err(Error::Parse(format!("qubit {qubit} outside {n_qubits}-qubit register")));
        }
        let code = letter_code(letter).ok_or_else(|| Error::Parse(format!("unknown Pauli letter {letter:?}")))?;
        let (xb, zb) = letter_bits(code);
        Ok(PauliString { n_qubits, x: (xb as u64) << qubit, z: (zb as u64) << qubit })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Letter code on one qubit: 0=I, 1=X, 2=Y, 3=Z.
    pub fn letter(&self, qubit: usize) -> u8 {
        let xb = (self.x >> qubit) & 1;
        let zb = (self.z >> qubit) & 1;
        match (xb, zb) {
            (0, 0) => 0,
            (1, 0) => 1,
            (1, 1) => 2,
            _ => 3,
        }
    }

    pub fn index(&self) -> u128 {
        (0..self.n_qubits).fold(0u128, |acc, q| (acc << 2) | self.letter(q) as u128)
    }

    /// `index()` as a matrix position; only meaningful inside the dense limit.
    pub fn dense_index(&self) -> usize {
        self.index() as usize
    }

    pub fn support_mask(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> usize {
        self.support_mask().count_ones() as usize
    }

    pub fn support(&self) -> Vec<usize> {
        let m = self.support_mask();
        (0..self.n_qubits).filter(|q| (m >> q) & 1 == 1).collect()
    }

    fn same_width(&self, other: &PauliString) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch { left: self.n_qubits, right: other.n_qubits });
        }
        Ok(())
    }

    /// `matrix(self) * matrix(other) = phase * matrix(result)`.
    pub fn product(&self, other: &PauliString) -> Result<PhasedPauli> {
        self.same_width(other)?;
        Ok(self.product_unchecked(other))
    }

    pub(crate) fn product_unchecked(&self, other: &PauliString) -> PhasedPauli {
        // Each factor is i^{x.z} X^x Z^z; moving Z^{z1} past X^{x2} costs (-1)^{z1.x2}.
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let e = (self.x & self.z).count_ones()
            + (other.x & other.z).count_ones()
            + 2 * (self.z & other.x).count_ones()
            + 4 * 64
            - (x & z).count_ones();
        PhasedPauli { pauli: PauliString { n_qubits: self.n_qubits, x, z }, phase: Phase::from_exponent(e) }
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.same_width(other)?;
        Ok(self.commutes_unchecked(other))
    }

    pub(crate) fn commutes_unchecked(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Action on a computational basis state: `P|k> = phase |k'>`.
    ///
    /// Basis index `k` follows the usual tensor convention, qubit 0 being the
    /// most significant bit.
    pub fn apply_to_basis(&self, k: usize) -> (Complex64, usize) {
        let xb = self.basis_mask(self.x);
        let zb = self.basis_mask(self.z);
        let mut e = (self.x & self.z).count_ones();
        if (zb & k as u64).count_ones() % 2 == 1 {
            e += 2;
        }
        (Phase::from_exponent(e).to_complex(), k ^ xb as usize)
    }

    fn basis_mask(&self, m: u64) -> u64 {
        (0..self.n_qubits).fold(0u64, |acc, q| acc | (((m >> q) & 1) << (self.n_qubits - 1 - q)))
    }

    pub fn dense_matrix(&self) -> Result<DMatrix<Complex64>> {
        self.dense_matrix_limited(DENSE_LIMIT)
    }

    pub fn dense_matrix_limited(&self, limit: usize) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > limit {
            return Err(Error::DenseLimit { n_qubits: self.n_qubits, limit });
        }
        let d = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(d, d);
        for k in 0..d {
            let (ph, row) = self.apply_to_basis(k);
            m[(row, k)] = ph;
        }
        Ok(m)
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n_qubits.cmp(&other.n_qubits).then_with(|| self.index().cmp(&other.index()))
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn letter_code(c: char) -> Option<u8> {
    match c.to_ascii_uppercase() {
        'I' => Some(0),
        'X' => Some(1),
        'Y' => Some(2),
        'Z' => Some(3),
        _ => None,
    }
}

fn letter_bits(code: u8) -> (bool, bool) {
    match code {
        0 => (false, false),
        1 => (true, false),
        2 => (true, true),
        _ => (false, true),
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Case-insensitive letters, leftmost is qubit 0.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let n = s.chars().count();
        Self::check_width(n).map_err(|_| Error::Parse(format!("bad Pauli string {s:?}")))?;
        let (mut x, mut z) = (0u64, 0u64);
        for (q, c) in s.chars().enumerate() {
            let code = letter_code(c).ok_or_else(|| Error::Parse(format!("bad Pauli letter {c:?} in {s:?}")))?;
            let (xb, zb) = letter_bits(code);
            x |= (xb as u64) << q;
            z |= (zb as u64) << q;
        }
        Ok(PauliString { n_qubits: n, x, z })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits {
            f.write_str(["I", "X", "Y", "Z"][self.letter(q) as usize])?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli({self})")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PhasedPauli {
    pub pauli: PauliString,
    pub phase: Phase,
}

impl PhasedPauli {
    pub fn new(pauli: PauliString) -> Self {
        PhasedPauli { pauli, phase: Phase::ONE }
    }

    pub fn try_mul(&self, rhs: &PhasedPauli) -> Result<PhasedPauli> {
        let p = self.pauli.product(&rhs.pauli)?;
        Ok(PhasedPauli { pauli: p.pauli, phase: p.phase * self.phase * rhs.phase })
    }
}

impl fmt::Display for PhasedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.phase, self.pauli)
    }
}

/// Which Paulis [`enumerate_paulis`] keeps.
#[derive(Clone, Debug, Default)]
pub struct PauliFilter {
    /// Inclusive weight range.
    pub weight: Option<(usize, usize)>,
    /// Keep only Paulis whose support lies inside this qubit set.
    pub support_within: Option<Vec<usize>>,
}

/// All Paulis on `n_qubits` in canonical index order, filtered.
pub fn enumerate_paulis(n_qubits: usize, filter: &PauliFilter) -> Result<Vec<PauliString>> {
    if n_qubits == 0 || n_qubits > 32 {
        return Err(Error::InvalidQubitCount(n_qubits));
    }
    let allowed = match &filter.support_within {
        Some(qs) => {
            let mut m = 0u64;
            for &q in qs {
                if q >= n_qubits {
                    return Err(Error::Parse(format!("qubit {q} outside {n_qubits}-qubit register")));
                }
                m |= 1 << q;
            }
            m
        }
        None => PauliString::mask(n_qubits),
    };
    let total = 1u128 << (2 * n_qubits);
    let mut out = Vec::new();
    // Walk only the allowed support when it is small relative to the register.
    if allowed != PauliString::mask(n_qubits) {
        let qubits: Vec<usize> = (0..n_qubits).filter(|q| (allowed >> q) & 1 == 1).collect();
        for code in 0..(1u64 << (2 * qubits.len())) {
            let (mut x, mut z) = (0u64, 0u64);
            for (i, &q) in qubits.iter().enumerate() {
                let (xb, zb) = letter_bits(((code >> (2 * i)) & 3) as u8);
                x |= (xb as u64) << q;
                z |= (zb as u64) << q;
            }
            out.push(PauliString { n_qubits, x, z });
        }
        out.sort();
    } else {
        for i in 0..total {
            out.push(PauliString::from_index(n_qubits, i)?);
        }
    }
    if let Some((lo, hi)) = filter.weight {
        out.retain(|p| (lo..=hi).contains(&p.weight()));
    }
    Ok(out)
}

/// Every Pauli on `n_qubits` qubits, identity first. Dense-limit sized.
pub fn all_paulis(n_qubits: usize) -> Vec<PauliString> {
    let total = 1u128 << (2 * n_qubits);
    (0..total).map(|i| PauliString::from_index(n_qubits, i).expect("index in range")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_table() {
        let xy = p("X").product(&p("Y")).unwrap();
        assert_eq!(xy.pauli, p("Z"));
        assert_eq!(xy.phase, Phase::I);
        let yx = p("Y").product(&p("X")).unwrap();
        assert_eq!(yx.phase, Phase::MINUS_I);
        let zx = p("Z").product(&p("X")).unwrap();
        assert_eq!((zx.pauli, zx.phase), (p("Y"), Phase::I));
        for s in ["I", "X", "Y", "Z", "XYZ", "ZZIY"] {
            let sq = p(s).product(&p(s)).unwrap();
            assert!(sq.pauli.is_identity());
            assert_eq!(sq.phase, Phase::ONE);
        }
    }

    #[test]
    fn index_and_parse() {
        assert_eq!(p("IZ").index(), 3);
        assert_eq!(p("XI").index(), 4);
        assert_eq!(p("zz").to_string(), "ZZ");
        assert_eq!(p("XYZ").weight(), 3);
        assert_eq!(p("IXI").support(), vec![1]);
        assert!("XQ".parse::<PauliString>().is_err());
        assert!("".parse::<PauliString>().is_err());
    }

    #[test]
    fn mismatch_errors() {
        assert!(matches!(p("X").product(&p("XX")), Err(Error::QubitMismatch { .. })));
        assert!(p("X").commutes(&p("XX")).is_err());
    }

    #[test]
    fn commutation_examples() {
        assert!(!p("X").commutes(&p("Z")).unwrap());
        assert!(p("IZ").commutes(&p("ZZ")).unwrap());
        assert!(p("XX").commutes(&p("ZZ")).unwrap());
    }

    #[test]
    fn enumeration_counts() {
        let all = enumerate_paulis(1, &PauliFilter::default()).unwrap();
        assert_eq!(all, vec![p("I"), p("X"), p("Y"), p("Z")]);
        let w1 = PauliFilter { weight: Some((1, 1)), ..Default::default() };
        assert_eq!(enumerate_paulis(2, &w1).unwrap().len(), 6);
        let w3 = PauliFilter { weight: Some((3, 3)), ..Default::default() };
        assert_eq!(enumerate_paulis(3, &w3).unwrap().len(), 27);
        let within = PauliFilter { weight: None, support_within: Some(vec![0, 2]) };
        let got = enumerate_paulis(3, &within).unwrap();
        assert_eq!(got.len(), 16);
        assert!(got.windows(2).all(|w| w[0] < w[1]));
        assert!(got.iter().all(|q| q.letter(1) == 0));
        let empty = PauliFilter { weight: Some((4, 4)), ..Default::default() };
        assert!(enumerate_paulis(2, &empty).unwrap().is_empty());
    }

    #[test]
    fn dense_y_and_kron() {
        let y = p("Y").dense_matrix().unwrap();
        assert_eq!(y[(0, 1)], Complex64::new(0.0, -1.0));
        assert_eq!(y[(1, 0)], Complex64::new(0.0, 1.0));
        let xz = p("XZ").dense_matrix().unwrap();
        let x = p("X").dense_matrix().unwrap();
        let z = p("Z").dense_matrix().unwrap();
        assert_eq!(xz, x.kronecker(&z));
        assert!(matches!(p("XXXXXX").dense_matrix(), Err(Error::DenseLimit { n_qubits: 6, limit: 5 })));
    }
}
