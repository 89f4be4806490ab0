//! Elementary error generators, their duals, and rate decomposition.
//!
//! Every elementary generator is a short Choi sum (`rho -> sum c A rho B`):
//!
//! | label    | Choi sum                                                   |
//! |----------|------------------------------------------------------------|
//! | `H(P)`   | `-i P rho + i rho P`                                       |
//! | `S(P)`   | `P rho P - rho`                                            |
//! | `C(P,Q)` | `P rho Q + Q rho P - 1/2 {{P,Q}, rho}`                     |
//! | `A(P,Q)` | `i (P rho Q - Q rho P + 1/2 {[P,Q], rho})`                 |
//!
//! The duals drop every term that involves the identity and are scaled so
//! that `<dual_i, elem_j> = delta_ij` under `Tr(A^T B)`. With Choi units of
//! squared norm `d^2` the constants are `1/(2d^2)` for H, C and A and
//! `1/d^2` for S. They are re-checked against the elementary basis once per
//! (sector, N) before use.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{all_paulis, PauliString};
use crate::superop::{check_dense, choi_sum_entries, ptm_from_choi_terms, superop_dim, ChoiTerm, ProcessMatrix};

/// Rates below this magnitude are left out of reports.
pub const REPORT_FLOOR: f64 = 1e-14;
/// Top-row tolerance for accepting a matrix as a TP generator.
pub const GENERATOR_TP_TOL: f64 = 1e-9;
/// Tolerance for the stochastic tensor and pairwise rate bounds.
pub const STOCHASTIC_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sector {
    H,
    S,
    C,
    A,
}

impl Sector {
    pub const ALL: [Sector; 4] = [Sector::H, Sector::S, Sector::C, Sector::A];

    pub fn is_pair(self) -> bool {
        matches!(self, Sector::C | Sector::A)
    }

    pub fn name(self) -> &'static str {
        match self {
            Sector::H => "Hamiltonian",
            Sector::S => "Pauli-stochastic",
            Sector::C => "Pauli-correlation",
            Sector::A => "active",
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sector::H => "H",
            Sector::S => "S",
            Sector::C => "C",
            Sector::A => "A",
        })
    }
}

impl FromStr for Sector {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "H" => Ok(Sector::H),
            "S" => Ok(Sector::S),
            "C" => Ok(Sector::C),
            "A" => Ok(Sector::A),
            other => Err(Error::InvalidLabel(format!("unknown sector {other:?}"))),
        }
    }
}

/// Canonical identifier of one elementary generator.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GeneratorLabel {
    sector: Sector,
    p: PauliString,
    q: Option<PauliString>,
}

impl GeneratorLabel {
    pub fn new(sector: Sector, p: PauliString, q: Option<PauliString>) -> Result<Self> {
        if p.is_identity() {
            return Err(Error::InvalidLabel(format!("{sector} label uses the identity Pauli")));
        }
        match (sector.is_pair(), q) {
            (false, None) => {}
            (false, Some(_)) => return Err(Error::InvalidLabel(format!("{sector} takes a single Pauli"))),
            (true, None) => return Err(Error::InvalidLabel(format!("{sector} needs a Pauli pair"))),
            (true, Some(q)) => {
                if q.n_qubits() != p.n_qubits() {
                    return Err(Error::QubitMismatch { left: p.n_qubits(), right: q.n_qubits() });
                }
                if q.is_identity() {
                    return Err(Error::InvalidLabel(format!("{sector} label uses the identity Pauli")));
                }
                if q.index() <= p.index() {
                    return Err(Error::InvalidLabel(format!(
                        "{sector}({p},{q}) is not canonical: need index(P) < index(Q)"
                    )));
                }
            }
        }
        Ok(GeneratorLabel { sector, p, q })
    }

    pub fn h(p: PauliString) -> Result<Self> {
        Self::new(Sector::H, p, None)
    }

    pub fn s(p: PauliString) -> Result<Self> {
        Self::new(Sector::S, p, None)
    }

    pub fn c(p: PauliString, q: PauliString) -> Result<Self> {
        Self::new(Sector::C, p, Some(q))
    }

    pub fn a(p: PauliString, q: PauliString) -> Result<Self> {
        Self::new(Sector::A, p, Some(q))
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn p(&self) -> PauliString {
        self.p
    }

    pub fn q(&self) -> Option<PauliString> {
        self.q
    }

    pub fn n_qubits(&self) -> usize {
        self.p.n_qubits()
    }

    /// Union of the Pauli supports, as a bit mask.
    pub fn support_mask(&self) -> u64 {
        self.p.support_mask() | self.q.map_or(0, |q| q.support_mask())
    }

    pub fn support(&self) -> Vec<usize> {
        let m = self.support_mask();
        (0..self.n_qubits()).filter(|q| (m >> q) & 1 == 1).collect()
    }

    pub fn weight(&self) -> usize {
        self.support_mask().count_ones() as usize
    }

    /// Whether the two Paulis of a C/A label commute (`None` for H/S).
    pub fn pair_commutes(&self) -> Option<bool> {
        self.q.map(|q| self.p.commutes_unchecked(&q))
    }

    pub fn choi_terms(&self) -> Vec<ChoiTerm> {
        let n = self.n_qubits();
        let id = PauliString::identity(n).expect("valid width");
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let p = self.p;
        match (self.sector, self.q) {
            (Sector::H, _) => vec![ChoiTerm::new(-i, p, id), ChoiTerm::new(i, id, p)],
            (Sector::S, _) => vec![ChoiTerm::new(one, p, p), ChoiTerm::new(-one, id, id)],
            (Sector::C, Some(q)) => {
                let mut t = vec![ChoiTerm::new(one, p, q), ChoiTerm::new(one, q, p)];
                if p.commutes_unchecked(&q) {
                    // {P,Q} = 2 phi R with phi = +-1.
                    let pq = p.product_unchecked(&q);
                    let phi = pq.phase.to_complex();
                    t.push(ChoiTerm::new(-phi, pq.pauli, id));
                    t.push(ChoiTerm::new(-phi, id, pq.pauli));
                }
                t
            }
            (Sector::A, Some(q)) => {
                let mut t = vec![ChoiTerm::new(i, p, q), ChoiTerm::new(-i, q, p)];
                if !p.commutes_unchecked(&q) {
                    // [P,Q] = 2 phi R with phi = +-i.
                    let pq = p.product_unchecked(&q);
                    let phi = pq.phase.to_complex();
                    t.push(ChoiTerm::new(i * phi, pq.pauli, id));
                    t.push(ChoiTerm::new(i * phi, id, pq.pauli));
                }
                t
            }
            _ => unreachable!("pair sectors always carry q"),
        }
    }

    fn dual_choi_terms(&self) -> Vec<ChoiTerm> {
        let n = self.n_qubits();
        let id = PauliString::identity(n).expect("valid width");
        let d2 = superop_dim(n) as f64;
        let i = Complex64::new(0.0, 1.0);
        let half = Complex64::new(0.5 / d2, 0.0);
        let p = self.p;
        match (self.sector, self.q) {
            (Sector::H, _) => vec![ChoiTerm::new(-i * half, p, id), ChoiTerm::new(i * half, id, p)],
            (Sector::S, _) => vec![ChoiTerm::new(Complex64::new(1.0 / d2, 0.0), p, p)],
            (Sector::C, Some(q)) => vec![ChoiTerm::new(half, p, q), ChoiTerm::new(half, q, p)],
            (Sector::A, Some(q)) => {
                vec![ChoiTerm::new(i * half, p, q), ChoiTerm::new(-i * half, q, p)]
            }
            _ => unreachable!("pair sectors always carry q"),
        }
    }
}

impl fmt::Display for GeneratorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.q {
            Some(q) => write!(f, "{}:{},{}", self.sector, self.p, q),
            None => write!(f, "{}:{}", self.sector, self.p),
        }
    }
}

impl fmt::Debug for GeneratorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for GeneratorLabel {
    type Err = Error;

    /// `KIND:P` or `KIND:P,Q`, e.g. `H:Y`, `A:X,Y`, `C:IX,ZX`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) =
            s.split_once(':').ok_or_else(|| Error::InvalidLabel(format!("expected KIND:P[,Q], got {s:?}")))?;
        let sector: Sector = kind.parse()?;
        let mut parts = rest.split(',');
        let p: PauliString = parts.next().unwrap_or("").parse()?;
        let q = parts.next().map(str::parse::<PauliString>).transpose()?;
        if parts.next().is_some() {
            return Err(Error::InvalidLabel(format!("too many Paulis in {s:?}")));
        }
        GeneratorLabel::new(sector, p, q)
    }
}

/// Every canonical label on `n_qubits`, in (sector, P, Q) order.
pub fn all_labels(n_qubits: usize) -> Result<Vec<GeneratorLabel>> {
    check_dense(n_qubits)?;
    let paulis: Vec<PauliString> = all_paulis(n_qubits).into_iter().skip(1).collect();
    let mut out = Vec::new();
    for sector in Sector::ALL {
        if sector.is_pair() {
            for (i, p) in paulis.iter().enumerate() {
                for q in &paulis[i + 1..] {
                    out.push(GeneratorLabel { sector, p: *p, q: Some(*q) });
                }
            }
        } else {
            out.extend(paulis.iter().map(|p| GeneratorLabel { sector, p: *p, q: None }));
        }
    }
    Ok(out)
}

fn merged_real_entries(n_qubits: usize, terms: &[ChoiTerm]) -> Vec<(usize, usize, f64)> {
    let mut acc: HashMap<(usize, usize), Complex64> = HashMap::new();
    for (r, c, v) in choi_sum_entries(n_qubits, terms) {
        *acc.entry((r, c)).or_default() += v;
    }
    let mut out: Vec<(usize, usize, f64)> =
        acc.into_iter().filter(|(_, v)| v.re != 0.0).map(|((r, c), v)| (r, c, v.re)).collect();
    out.sort_by_key(|&(r, c, _)| (c, r));
    out
}

/// Nonzero PTM entries of an elementary generator.
pub fn elementary_entries(label: &GeneratorLabel) -> Vec<(usize, usize, f64)> {
    merged_real_entries(label.n_qubits(), &label.choi_terms())
}

pub fn elementary_generator(label: &GeneratorLabel) -> Result<ProcessMatrix> {
    check_dense(label.n_qubits())?;
    ptm_from_choi_terms(label.n_qubits(), &label.choi_terms())
}

/// Uncalibrated dual: the analytic constants only.
fn raw_dual_entries(label: &GeneratorLabel) -> Vec<(usize, usize, f64)> {
    merged_real_entries(label.n_qubits(), &label.dual_choi_terms())
}

fn representative(sector: Sector, n_qubits: usize) -> GeneratorLabel {
    let x = PauliString::single(n_qubits, 0, 'X').expect("valid width");
    let y = PauliString::single(n_qubits, 0, 'Y').expect("valid width");
    let q = sector.is_pair().then_some(y);
    GeneratorLabel::new(sector, x, q).expect("canonical")
}

fn pair_entries(a: &[(usize, usize, f64)], b: &[(usize, usize, f64)]) -> f64 {
    let lookup: HashMap<(usize, usize), f64> = b.iter().map(|&(r, c, v)| ((r, c), v)).collect();
    a.iter().map(|&(r, c, v)| v * lookup.get(&(r, c)).copied().unwrap_or(0.0)).sum()
}

/// Factor that brings `<dual, elem>` to exactly one for `sector` on
/// `n_qubits`. Computed once and cached.
pub fn dual_calibration(sector: Sector, n_qubits: usize) -> f64 {
    static CACHE: OnceLock<RwLock<HashMap<(Sector, usize), f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.read().expect("calibration cache").get(&(sector, n_qubits)) {
        return *v;
    }
    let label = representative(sector, n_qubits);
    let pairing = pair_entries(&raw_dual_entries(&label), &elementary_entries(&label));
    let factor = 1.0 / pairing;
    cache.write().expect("calibration cache").insert((sector, n_qubits), factor);
    factor
}

/// Nonzero PTM entries of the calibrated dual generator.
pub fn dual_entries(label: &GeneratorLabel) -> Vec<(usize, usize, f64)> {
    let k = dual_calibration(label.sector, label.n_qubits());
    let mut e = raw_dual_entries(label);
    for entry in &mut e {
        entry.2 *= k;
    }
    e
}

pub fn dual_generator(label: &GeneratorLabel) -> Result<ProcessMatrix> {
    let n = label.n_qubits();
    check_dense(n)?;
    let dim = superop_dim(n);
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for (r, c, v) in dual_entries(label) {
        m[(r, c)] = v;
    }
    ProcessMatrix::new(n, m)
}

/// `pairing[i][j] = <dual(labels[i]), elementary(labels[j])>`.
pub fn pairing_matrix(labels: &[GeneratorLabel]) -> DMatrix<f64> {
    let duals: Vec<_> = labels.iter().map(dual_entries).collect();
    let elems: Vec<HashMap<(usize, usize), f64>> =
        labels.iter().map(|l| elementary_entries(l).into_iter().map(|(r, c, v)| ((r, c), v)).collect()).collect();
    DMatrix::from_fn(labels.len(), labels.len(), |i, j| {
        duals[i].iter().map(|&(r, c, v)| v * elems[j].get(&(r, c)).copied().unwrap_or(0.0)).sum()
    })
}

/// How an error generator was extracted from `E = G target^-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// `L = log(E)`.
    #[default]
    Logarithm,
    /// `L = E - I`.
    Difference,
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::Logarithm => "logarithm",
            Convention::Difference => "difference",
        })
    }
}

impl FromStr for Convention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "log" | "logarithm" => Ok(Convention::Logarithm),
            "diff" | "difference" => Ok(Convention::Difference),
            other => Err(Error::Parse(format!("unknown convention {other:?}"))),
        }
    }
}

/// Post-gate error generator of `gate` relative to `target`.
pub fn extract_error_generator(
    gate: &ProcessMatrix,
    target: &ProcessMatrix,
    convention: Convention,
) -> Result<ProcessMatrix> {
    gate.same_width(target)?;
    let error = gate.compose(&target.inverse()?)?;
    match convention {
        Convention::Logarithm => error.log(),
        Convention::Difference => error.sub(&ProcessMatrix::identity(gate.n_qubits())?),
    }
}

/// Sparse coordinates of a generator in the elementary basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorGeneratorRates {
    n_qubits: usize,
    convention: Convention,
    rates: BTreeMap<GeneratorLabel, f64>,
}

impl ErrorGeneratorRates {
    pub fn new(n_qubits: usize, convention: Convention) -> Self {
        ErrorGeneratorRates { n_qubits, convention, rates: BTreeMap::new() }
    }

    pub fn from_pairs(
        n_qubits: usize,
        convention: Convention,
        pairs: impl IntoIterator<Item = (GeneratorLabel, f64)>,
    ) -> Result<Self> {
        let mut r = Self::new(n_qubits, convention);
        for (l, v) in pairs {
            r.add(l, v)?;
        }
        Ok(r)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn set_convention(&mut self, convention: Convention) {
        self.convention = convention;
    }

    fn check(&self, label: &GeneratorLabel) -> Result<()> {
        if label.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch { left: self.n_qubits, right: label.n_qubits() });
        }
        Ok(())
    }

    /// Overwrites; a zero rate removes the entry.
    pub fn set(&mut self, label: GeneratorLabel, rate: f64) -> Result<()> {
        self.check(&label)?;
        if rate == 0.0 {
            self.rates.remove(&label);
        } else {
            self.rates.insert(label, rate);
        }
        Ok(())
    }

    pub fn add(&mut self, label: GeneratorLabel, rate: f64) -> Result<()> {
        let v = self.get(&label) + rate;
        self.set(label, v)
    }

    pub fn get(&self, label: &GeneratorLabel) -> f64 {
        self.rates.get(label).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GeneratorLabel, f64)> {
        self.rates.iter().map(|(l, v)| (l, *v))
    }

    pub fn labels(&self) -> impl Iterator<Item = &GeneratorLabel> {
        self.rates.keys()
    }

    pub fn retain(&mut self, mut keep: impl FnMut(&GeneratorLabel, f64) -> bool) {
        self.rates.retain(|l, v| keep(l, *v));
    }

    /// Copy without entries smaller than `threshold` in magnitude.
    pub fn above(&self, threshold: f64) -> Self {
        let mut out = self.clone();
        out.retain(|_, v| v.abs() >= threshold);
        out
    }

    pub fn sector(&self, sector: Sector) -> Self {
        let mut out = self.clone();
        out.retain(|l, _| l.sector == sector);
        out
    }

    /// Entries sorted by decreasing magnitude.
    pub fn by_magnitude(&self) -> Vec<(GeneratorLabel, f64)> {
        let mut v: Vec<_> = self.rates.iter().map(|(l, r)| (*l, *r)).collect();
        v.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
        v
    }

    /// Euclidean norm of the rate vector.
    pub fn norm(&self) -> f64 {
        self.rates.values().fold(0.0, |acc, v| acc + v * v).sqrt()
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::QubitMismatch { left: self.n_qubits, right: other.n_qubits });
        }
        let mut out = self.clone();
        for (l, v) in other.iter() {
            out.add(*l, -v)?;
        }
        Ok(out)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for v in out.rates.values_mut() {
            *v *= factor;
        }
        out.rates.retain(|_, v| *v != 0.0);
        out
    }
}

/// Rates of a TP generator in the elementary basis.
///
/// Rejects matrices whose top row is not zero: such a matrix is not an error
/// generator and silently projecting it would hide the upstream problem.
pub fn decompose(generator: &ProcessMatrix, convention: Convention) -> Result<ErrorGeneratorRates> {
    let dev = generator.generator_tp_deviation();
    if dev > GENERATOR_TP_TOL {
        return Err(Error::NotTracePreserving(dev));
    }
    let n = generator.n_qubits();
    let m = generator.matrix();
    let mut out = ErrorGeneratorRates::new(n, convention);
    let mut push = |label: GeneratorLabel, entries: &[(usize, usize, f64)]| {
        let rate = entries.iter().fold(0.0, |acc, &(r, c, v)| acc + v * m[(r, c)]);
        if rate != 0.0 {
            out.rates.insert(label, rate);
        }
    };
    if n <= DUAL_TABLE_LIMIT {
        for (label, entries) in dual_table(n)?.iter() {
            push(*label, entries);
        }
    } else {
        for label in all_labels(n)? {
            push(label, &dual_entries(&label));
        }
    }
    Ok(out)
}

/// Widths whose full dual table is kept in memory (240 labels at 2 qubits,
/// 4032 at 3; 4 qubits would already need about 16M entries).
const DUAL_TABLE_LIMIT: usize = 3;

type DualTable = Arc<Vec<(GeneratorLabel, Vec<(usize, usize, f64)>)>>;

fn dual_table(n_qubits: usize) -> Result<DualTable> {
    static TABLES: OnceLock<RwLock<HashMap<usize, DualTable>>> = OnceLock::new();
    let tables = TABLES.get_or_init(Default::default);
    if let Some(t) = tables.read().expect("dual table cache").get(&n_qubits) {
        return Ok(Arc::clone(t));
    }
    let table: DualTable = Arc::new(all_labels(n_qubits)?.into_iter().map(|l| (l, dual_entries(&l))).collect());
    tables.write().expect("dual table cache").insert(n_qubits, Arc::clone(&table));
    Ok(table)
}

/// `sum rate * elementary(label)`.
pub fn reconstruct(rates: &ErrorGeneratorRates) -> Result<ProcessMatrix> {
    let n = rates.n_qubits;
    check_dense(n)?;
    let dim = superop_dim(n);
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for (label, rate) in rates.iter() {
        for (r, c, v) in elementary_entries(label) {
            m[(r, c)] += rate * v;
        }
    }
    ProcessMatrix::new(n, m)
}

/// `exp(L) target` or `(I + L) target`, per the rates' convention.
pub fn process_from_rates(rates: &ErrorGeneratorRates, target: &ProcessMatrix) -> Result<ProcessMatrix> {
    let l = reconstruct(rates)?;
    l.same_width(target)?;
    let error = match rates.convention {
        Convention::Logarithm => l.exp()?,
        Convention::Difference => l.add(&ProcessMatrix::identity(l.n_qubits())?)?,
    };
    error.compose(target)
}

/// Rates split by sector; the four parts are disjoint and sum to the input.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorSplit {
    pub h: ErrorGeneratorRates,
    pub s: ErrorGeneratorRates,
    pub c: ErrorGeneratorRates,
    pub a: ErrorGeneratorRates,
}

impl SectorSplit {
    pub fn part(&self, sector: Sector) -> &ErrorGeneratorRates {
        match sector {
            Sector::H => &self.h,
            Sector::S => &self.s,
            Sector::C => &self.c,
            Sector::A => &self.a,
        }
    }

    /// Projection of the generator onto one sector, as a matrix.
    pub fn projection(&self, sector: Sector) -> Result<ProcessMatrix> {
        reconstruct(self.part(sector))
    }
}

pub fn sector_split(rates: &ErrorGeneratorRates) -> SectorSplit {
    SectorSplit {
        h: rates.sector(Sector::H),
        s: rates.sector(Sector::S),
        c: rates.sector(Sector::C),
        a: rates.sector(Sector::A),
    }
}

/// Symmetric matrix of stochastic rates: `s_P` on the diagonal and
/// `c_{P,Q}` off it, restricted to Paulis that carry an S or C rate.
#[derive(Clone, Debug)]
pub struct StochasticTensor {
    pub paulis: Vec<PauliString>,
    pub matrix: DMatrix<f64>,
}

impl StochasticTensor {
    pub fn from_rates(rates: &ErrorGeneratorRates) -> Self {
        let mut paulis: Vec<PauliString> = rates
            .labels()
            .filter(|l| matches!(l.sector, Sector::S | Sector::C))
            .flat_map(|l| std::iter::once(l.p).chain(l.q))
            .collect();
        paulis.sort();
        paulis.dedup();
        let pos: HashMap<PauliString, usize> = paulis.iter().enumerate().map(|(i, p)| (*p, i)).collect();
        let mut m = DMatrix::<f64>::zeros(paulis.len(), paulis.len());
        for (l, v) in rates.iter() {
            match (l.sector, l.q) {
                (Sector::S, _) => m[(pos[&l.p], pos[&l.p])] = v,
                (Sector::C, Some(q)) => {
                    let (i, j) = (pos[&l.p], pos[&q]);
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
                _ => {}
            }
        }
        StochasticTensor { paulis, matrix: m }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        if self.paulis.is_empty() {
            return 0.0;
        }
        SymmetricEigen::new(self.matrix.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -STOCHASTIC_TOL
    }
}

/// `|c| or |a|` exceeding `sqrt(s_P s_Q)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundViolation {
    pub label: String,
    pub magnitude: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StochasticReport {
    pub tensor_psd: bool,
    pub min_eigenvalue: f64,
    pub violations: Vec<BoundViolation>,
    pub negative_rates: Vec<(String, f64)>,
}

impl StochasticReport {
    pub fn is_clean(&self) -> bool {
        self.tensor_psd && self.violations.is_empty()
    }
}

/// Necessary conditions for the rates to describe a Lindbladian.
pub fn stochastic_constraints(rates: &ErrorGeneratorRates) -> StochasticReport {
    let tensor = StochasticTensor::from_rates(rates);
    let min_eig = tensor.min_eigenvalue();
    let s = |p: &PauliString| rates.get(&GeneratorLabel { sector: Sector::S, p: *p, q: None });
    let mut violations = Vec::new();
    let mut negative = Vec::new();
    for (l, v) in rates.iter() {
        match (l.sector, l.q) {
            (Sector::S, _) if v < -STOCHASTIC_TOL => negative.push((l.to_string(), v)),
            (Sector::C | Sector::A, Some(q)) => {
                let bound = (s(&l.p).max(0.0) * s(&q).max(0.0)).sqrt();
                if v.abs() > bound + STOCHASTIC_TOL {
                    violations.push(BoundViolation { label: l.to_string(), magnitude: v.abs(), bound });
                }
            }
            _ => {}
        }
    }
    StochasticReport {
        tensor_psd: min_eig >= -STOCHASTIC_TOL,
        min_eigenvalue: min_eig,
        violations,
        negative_rates: negative,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn l(s: &str) -> GeneratorLabel {
        s.parse().unwrap()
    }

    /// Image of basis Pauli `col` as a 4-vector over (I, X, Y, Z).
    fn column(m: &ProcessMatrix, col: usize) -> Vec<f64> {
        m.matrix().column(col).iter().copied().collect()
    }

    #[test]
    fn label_parsing_and_canonical_order() {
        assert_eq!(l("A:X,Y").to_string(), "A:X,Y");
        assert_eq!(l("c:ix,zx").to_string(), "C:IX,ZX");
        assert!(matches!("A:Y,X".parse::<GeneratorLabel>(), Err(Error::InvalidLabel(_))));
        assert!(matches!("H:I".parse::<GeneratorLabel>(), Err(Error::InvalidLabel(_))));
        assert!("S:X,Y".parse::<GeneratorLabel>().is_err());
        assert!("C:X".parse::<GeneratorLabel>().is_err());
        assert!("C:X,X".parse::<GeneratorLabel>().is_err());
        assert!("Q:X".parse::<GeneratorLabel>().is_err());
        assert_eq!(l("C:IZ,XI").weight(), 2);
    }

    #[test]
    fn hamiltonian_y_rotates_xz_plane() {
        let h = elementary_generator(&l("H:Y")).unwrap();
        assert_eq!(column(&h, 0), vec![0.0; 4]);
        assert_eq!(column(&h, 1), vec![0.0, 0.0, 0.0, -2.0]);
        assert_eq!(column(&h, 2), vec![0.0; 4]);
        assert_eq!(column(&h, 3), vec![0.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn stochastic_x_is_diagonal() {
        let s = elementary_generator(&l("S:X")).unwrap();
        let diag: Vec<f64> = s.matrix().diagonal().iter().copied().collect();
        assert_eq!(diag, vec![0.0, 0.0, -2.0, -2.0]);
        assert_eq!(s.matrix().iter().filter(|v| **v != 0.0).count(), 2);
    }

    #[test]
    fn active_xy_shifts_identity_down() {
        let a = elementary_generator(&l("A:X,Y")).unwrap();
        assert_eq!(column(&a, 0), vec![0.0, 0.0, 0.0, -4.0]);
        for c in 1..4 {
            assert_eq!(column(&a, c), vec![0.0; 4]);
        }
    }

    #[test]
    fn correlation_xz_swaps_into_each_other() {
        let c = elementary_generator(&l("C:X,Z")).unwrap();
        assert_eq!(column(&c, 1), vec![0.0, 0.0, 0.0, 2.0]);
        assert_eq!(column(&c, 3), vec![0.0, 2.0, 0.0, 0.0]);
        assert_eq!(column(&c, 0), vec![0.0; 4]);
        assert_eq!(column(&c, 2), vec![0.0; 4]);
    }

    #[test]
    fn every_elementary_generator_is_tp() {
        for label in all_labels(2).unwrap() {
            let g = elementary_generator(&label).unwrap();
            assert_eq!(g.generator_tp_deviation(), 0.0, "{label}");
        }
    }

    #[test]
    fn duals_pair_to_identity_one_qubit() {
        let labels = all_labels(1).unwrap();
        assert_eq!(labels.len(), 12);
        let m = pairing_matrix(&labels);
        assert!((m - DMatrix::<f64>::identity(12, 12)).amax() < 1e-12);
        for s in Sector::ALL {
            assert!((dual_calibration(s, 1) - 1.0).abs() < 1e-15, "{s}");
        }
    }

    #[test]
    fn duals_are_orthogonal_and_s_duals_not_tp() {
        let labels = all_labels(1).unwrap();
        let duals: Vec<_> = labels.iter().map(|l| dual_generator(l).unwrap()).collect();
        for i in 0..duals.len() {
            for j in 0..duals.len() {
                if i != j {
                    assert_eq!(duals[i].hs_inner(&duals[j]).unwrap(), 0.0);
                }
            }
        }
        let sx = dual_generator(&l("S:X")).unwrap();
        assert!(sx.generator_tp_deviation() > 0.0);
    }

    #[test]
    fn decompose_linear_combination() {
        let g = elementary_generator(&l("H:Z")).unwrap().scaled(0.03);
        let g = g.add(&elementary_generator(&l("S:X")).unwrap().scaled(0.01)).unwrap();
        let r = decompose(&g, Convention::Logarithm).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r.get(&l("H:Z")) - 0.03).abs() < 1e-15);
        assert!((r.get(&l("S:X")) - 0.01).abs() < 1e-15);
        assert!(decompose(&ProcessMatrix::zeros(1).unwrap(), Convention::Logarithm).unwrap().is_empty());
    }

    #[test]
    fn decompose_rejects_non_tp() {
        let mut m = DMatrix::<f64>::zeros(4, 4);
        m[(0, 3)] = 0.1;
        let g = ProcessMatrix::new(1, m).unwrap();
        assert!(matches!(decompose(&g, Convention::Logarithm), Err(Error::NotTracePreserving(_))));
    }

    #[test]
    fn extraction_of_target_is_zero() {
        let g = crate::channels::ideal_target("Xpi2", 1).unwrap();
        for conv in [Convention::Logarithm, Convention::Difference] {
            let l = extract_error_generator(&g, &g, conv).unwrap();
            assert!(l.matrix().amax() < 1e-14);
        }
    }

    #[test]
    fn sector_split_counts_two_qubits() {
        let labels = all_labels(2).unwrap();
        assert_eq!(labels.len(), 240);
        let rates =
            ErrorGeneratorRates::from_pairs(2, Convention::Logarithm, labels.iter().map(|l| (*l, 1.0))).unwrap();
        let split = sector_split(&rates);
        assert_eq!([split.h.len(), split.s.len(), split.c.len(), split.a.len()], [15, 15, 105, 105]);
    }

    #[test]
    fn stochastic_bounds() {
        let r = ErrorGeneratorRates::from_pairs(
            1,
            Convention::Logarithm,
            [(l("S:X"), 0.01), (l("S:Z"), 0.01), (l("C:X,Z"), 0.02)],
        )
        .unwrap();
        let rep = stochastic_constraints(&r);
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].magnitude, 0.02);
        assert!((rep.violations[0].bound - 0.01).abs() < 1e-15);
        assert!(!rep.tensor_psd);

        let p = 0.01;
        let r =
            ErrorGeneratorRates::from_pairs(1, Convention::Logarithm, [(l("S:X"), p), (l("S:Z"), p), (l("C:X,Z"), p)])
                .unwrap();
        let rep = stochastic_constraints(&r);
        assert!(rep.is_clean());
        assert!(rep.min_eigenvalue.abs() < 1e-15);
    }

    #[test]
    fn pair_commutation_flag() {
        assert_eq!(l("C:IZ,ZZ").pair_commutes(), Some(true));
        assert_eq!(l("A:X,Y").pair_commutes(), Some(false));
        assert_eq!(l("H:X").pair_commutes(), None);
        let _ = p("X");
    }
}
