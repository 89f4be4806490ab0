//! Reduced error models: subspaces of the generator space chosen by sector,
//! weight and support.
//!
//! Model strings are comma-separated terms:
//!
//! ```text
//! H(<=2),S(<=2),A(1)      sector with weights: integer, <=w or *
//! C(2)@{0,1}|{1,2}        support restricted to subsets of listed qubit sets
//! H2+S2+A1                compact form, digit = maximum weight
//! depol[S:X + S:Y + S:Z]  named composite direction, optional c* coefficients
//! ```
//!
//! Aliases: `full`, `H+S`, `H+S+A1`, `W2` (every sector, weight <= 2),
//! `H2S2A1`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_bigint::{BigInt, BigUint};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{
    extract_error_generator, process_from_rates, reconstruct, Convention, ErrorGeneratorRates, GeneratorLabel, Sector,
};
use crate::metrics::entanglement_fidelity;
use crate::pauli::{PauliString, MAX_QUBITS};
use crate::superop::ProcessMatrix;

/// `labels_of` refuses to materialize more labels than this.
pub const ENUMERATION_LIMIT: u64 = 20_000_000;
/// Inclusion-exclusion over support families is exponential in their size.
const MAX_SUPPORT_SETS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightSet {
    All,
    Exact(usize),
    AtMost(usize),
}

impl WeightSet {
    pub fn contains(&self, w: usize) -> bool {
        match *self {
            WeightSet::All => w >= 1,
            WeightSet::Exact(k) => w == k,
            WeightSet::AtMost(k) => (1..=k).contains(&w),
        }
    }

    fn range(&self, n_qubits: usize) -> std::ops::RangeInclusive<usize> {
        match *self {
            WeightSet::All => 1..=n_qubits,
            WeightSet::Exact(k) => k..=k.min(n_qubits),
            WeightSet::AtMost(k) => 1..=k.min(n_qubits),
        }
    }

    fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidModel(format!("bad weight {s:?}"));
        let w = if s == "*" {
            WeightSet::All
        } else if let Some(rest) = s.strip_prefix("<=") {
            WeightSet::AtMost(rest.trim().parse().map_err(|_| bad())?)
        } else {
            WeightSet::Exact(s.parse().map_err(|_| bad())?)
        };
        if matches!(w, WeightSet::Exact(0) | WeightSet::AtMost(0)) {
            return Err(Error::InvalidModel("weights start at 1".into()));
        }
        Ok(w)
    }
}

impl fmt::Display for WeightSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSet::All => f.write_str("*"),
            WeightSet::Exact(k) => write!(f, "{k}"),
            WeightSet::AtMost(k) => write!(f, "<={k}"),
        }
    }
}

/// One sector/weight/support block of a model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelTerm {
    pub sector: Sector,
    pub weights: WeightSet,
    /// Qubit sets as bit masks; a label qualifies if its support lies
    /// inside any of them.
    pub support: Option<Vec<u64>>,
}

impl ModelTerm {
    pub fn new(sector: Sector, weights: WeightSet) -> Self {
        ModelTerm { sector, weights, support: None }
    }

    pub fn contains(&self, label: &GeneratorLabel) -> bool {
        label.sector() == self.sector
            && self.weights.contains(label.weight())
            && self.support.as_ref().is_none_or(|sets| sets.iter().any(|s| label.support_mask() & !s == 0))
    }
}

impl fmt::Display for ModelTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.sector, self.weights)?;
        if let Some(sets) = &self.support {
            f.write_str("@")?;
            for (i, s) in sets.iter().enumerate() {
                if i > 0 {
                    f.write_str("|")?;
                }
                let qs: Vec<String> = (0..64).filter(|q| (s >> q) & 1 == 1).map(|q| q.to_string()).collect();
                write!(f, "{{{}}}", qs.join(","))?;
            }
        }
        Ok(())
    }
}

/// A single model direction built from several elementary generators.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositeTerm {
    pub name: String,
    pub components: Vec<(GeneratorLabel, f64)>,
}

impl fmt::Display for CompositeTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components.iter().map(|(l, c)| format!("{c}*{l}")).collect();
        write!(f, "{}[{}]", self.name, parts.join(" + "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    n_qubits: usize,
    terms: Vec<ModelTerm>,
    composites: Vec<CompositeTerm>,
}

impl ModelSpec {
    pub fn new(n_qubits: usize, terms: Vec<ModelTerm>, composites: Vec<CompositeTerm>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidModel("a model needs at least one qubit".into()));
        }
        let spec = ModelSpec { n_qubits, terms, composites };
        spec.validate()?;
        Ok(spec)
    }

    /// Full generator space.
    pub fn full(n_qubits: usize) -> Result<Self> {
        Self::parse("full", n_qubits)
    }

    pub fn parse(text: &str, n_qubits: usize) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Err(Error::InvalidModel("empty model".into()));
        }
        let expanded = match text.to_ascii_uppercase().as_str() {
            "FULL" | "ALL" | "*" => "H(*),S(*),C(*),A(*)".to_string(),
            "H+S" => "H(*),S(*)".to_string(),
            "H+S+A1" => "H(*),S(*),A(1)".to_string(),
            "W2" => "H(<=2),S(<=2),C(<=2),A(<=2)".to_string(),
            "H2S2A1" => "H(<=2),S(<=2),A(1)".to_string(),
            _ => text.to_string(),
        };
        let mut terms = Vec::new();
        let mut composites = Vec::new();
        for piece in split_top_level(&expanded, ',')? {
            let piece = piece.trim();
            if piece.is_empty() {
                return Err(Error::InvalidModel(format!("empty term in {text:?}")));
            }
            match (piece.find('['), piece.find('(')) {
                (Some(b), p) if p.is_none_or(|p| b < p) => composites.push(parse_composite(piece, n_qubits)?),
                (_, Some(_)) => terms.push(parse_term(piece)?),
                _ => terms.extend(parse_compact(piece)?),
            }
        }
        ModelSpec::new(n_qubits, terms, composites)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[ModelTerm] {
        &self.terms
    }

    pub fn composites(&self) -> &[CompositeTerm] {
        &self.composites
    }

    /// Whether a label lies in one of the plain (non-composite) terms.
    pub fn contains(&self, label: &GeneratorLabel) -> bool {
        self.terms.iter().any(|t| t.contains(label))
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_qubits;
        for t in &self.terms {
            if let WeightSet::Exact(k) = t.weights {
                if k > n {
                    return Err(Error::InvalidModel(format!("weight {k} exceeds {n} qubits")));
                }
            }
            if let Some(sets) = &t.support {
                if sets.is_empty() || sets.contains(&0) {
                    return Err(Error::InvalidModel("empty support set".into()));
                }
                if sets.len() > MAX_SUPPORT_SETS {
                    return Err(Error::InvalidModel(format!("at most {MAX_SUPPORT_SETS} support sets per term")));
                }
                if n < 64 && sets.iter().any(|s| s >> n != 0) {
                    return Err(Error::InvalidModel(format!("support set names a qubit outside 0..{n}")));
                }
            }
        }
        for (i, a) in self.terms.iter().enumerate() {
            for b in &self.terms[i + 1..] {
                if terms_overlap(a, b, n) {
                    return Err(Error::InvalidModel(format!("terms {a} and {b} share generators")));
                }
            }
        }
        let mut names = BTreeSet::new();
        for c in &self.composites {
            if !names.insert(c.name.as_str()) {
                return Err(Error::InvalidModel(format!("duplicate composite name {:?}", c.name)));
            }
            for (l, _) in &c.components {
                if l.n_qubits() != n {
                    return Err(Error::InvalidModel(format!("composite {} uses {l} on the wrong register", c.name)));
                }
                if self.contains(l) {
                    return Err(Error::InvalidModel(format!("composite {} overlaps a plain term at {l}", c.name)));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.terms.iter().map(ToString::to_string).collect();
        parts.extend(self.composites.iter().map(ToString::to_string));
        f.write_str(&parts.join(","))
    }
}

/// Splits on `sep` outside brackets of any kind.
fn split_top_level(s: &str, sep: char) -> Result<Vec<&str>> {
    let mut depth = 0i32;
    let mut start = 0;
    let mut out = Vec::new();
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::InvalidModel(format!("unbalanced brackets in {s:?}")));
                }
            }
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::InvalidModel(format!("unbalanced brackets in {s:?}")));
    }
    out.push(&s[start..]);
    Ok(out)
}

fn parse_support(s: &str) -> Result<Vec<u64>> {
    let mut sets = Vec::new();
    for part in s.split('|') {
        let inner = part
            .trim()
            .strip_prefix('{')
            .and_then(|p| p.strip_suffix('}'))
            .ok_or_else(|| Error::InvalidModel(format!("support set {part:?} must look like {{0,1}}")))?;
        let mut mask = 0u64;
        for q in inner.split(',').map(str::trim).filter(|q| !q.is_empty()) {
            let q: usize = q.parse().map_err(|_| Error::InvalidModel(format!("bad qubit {q:?}")))?;
            if q >= 64 {
                return Err(Error::InvalidModel(format!("qubit {q} out of range")));
            }
            mask |= 1 << q;
        }
        sets.push(mask);
    }
    Ok(sets)
}

/// `SECTOR(weights)[@support]`.
fn parse_term(s: &str) -> Result<ModelTerm> {
    let (head, support) = match s.split_once('@') {
        Some((h, sup)) => (h.trim(), Some(parse_support(sup)?)),
        None => (s.trim(), None),
    };
    let open = head.find('(').expect("caller checked");
    let close = head
        .strip_suffix(')')
        .map(|_| head.len() - 1)
        .ok_or_else(|| Error::InvalidModel(format!("term {s:?} must end with ')'")))?;
    let sector: Sector = head[..open].parse().map_err(|_| Error::InvalidModel(format!("bad sector in {s:?}")))?;
    let weights = WeightSet::parse(&head[open + 1..close])?;
    Ok(ModelTerm { sector, weights, support })
}

/// `H2+S2+A1`, `H+S`, `W2`, or glued `H2S2A1`.
fn parse_compact(s: &str) -> Result<Vec<ModelTerm>> {
    let mut out = Vec::new();
    for chunk in s.split('+') {
        let chunk = chunk.trim();
        if chunk.is_empty() {
            return Err(Error::InvalidModel(format!("empty term in {s:?}")));
        }
        let chars: Vec<char> = chunk.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let letter = chars[i].to_ascii_uppercase();
            i += 1;
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let weights = if start == i {
                WeightSet::All
            } else {
                let digits: String = chars[start..i].iter().collect();
                WeightSet::parse(&format!("<={digits}"))?
            };
            let sectors: Vec<Sector> = match letter {
                'W' => Sector::ALL.to_vec(),
                c => vec![c
                    .to_string()
                    .parse()
                    .map_err(|_| Error::InvalidModel(format!("unknown sector {c:?} in {s:?}")))?],
            };
            out.extend(sectors.into_iter().map(|sec| ModelTerm::new(sec, weights)));
        }
    }
    Ok(out)
}

/// `name[c1*LABEL + LABEL - c3*LABEL]`.
fn parse_composite(s: &str, n_qubits: usize) -> Result<CompositeTerm> {
    let open = s.find('[').expect("caller checked");
    let name = s[..open].trim();
    if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-') {
        return Err(Error::InvalidModel(format!("composite needs a plain name, got {name:?}")));
    }
    let body = s[open + 1..]
        .trim_end()
        .strip_suffix(']')
        .ok_or_else(|| Error::InvalidModel(format!("composite {name} must end with ']'")))?;
    let mut merged: BTreeMap<GeneratorLabel, f64> = BTreeMap::new();
    for (sign, item) in signed_items(body) {
        let item = item.trim();
        let (coeff, label) = match item.split_once('*') {
            Some((c, l)) => {
                (c.trim().parse::<f64>().map_err(|_| Error::InvalidModel(format!("bad coefficient {c:?}")))?, l.trim())
            }
            None => (1.0, item),
        };
        let label: GeneratorLabel = label.parse().map_err(|e| Error::InvalidModel(format!("{e}")))?;
        if label.n_qubits() != n_qubits {
            return Err(Error::InvalidModel(format!("{label} is not a {n_qubits}-qubit label")));
        }
        *merged.entry(label).or_default() += sign * coeff;
    }
    let components: Vec<_> = merged.into_iter().filter(|(_, c)| *c != 0.0).collect();
    if components.is_empty() {
        return Err(Error::InvalidModel(format!("composite {name} is empty")));
    }
    Ok(CompositeTerm { name: name.to_string(), components })
}

/// Splits `a + b - c` into signed items, leaving exponents like `1e-3` intact.
fn signed_items(body: &str) -> Vec<(f64, &str)> {
    let bytes = body.as_bytes();
    let mut out = Vec::new();
    let mut sign = 1.0;
    let mut start = 0;
    for i in 0..bytes.len() {
        let c = bytes[i];
        if c != b'+' && c != b'-' {
            continue;
        }
        let exponent =
            i >= 2 && matches!(bytes[i - 1], b'e' | b'E') && (bytes[i - 2].is_ascii_digit() || bytes[i - 2] == b'.');
        if exponent {
            continue;
        }
        if !body[start..i].trim().is_empty() {
            out.push((sign, &body[start..i]));
        }
        sign = if c == b'-' { -1.0 } else { 1.0 };
        start = i + 1;
    }
    out.push((sign, &body[start..]));
    out
}

fn terms_overlap(a: &ModelTerm, b: &ModelTerm, n: usize) -> bool {
    if a.sector != b.sector {
        return false;
    }
    let Some(w) = a.weights.range(n).find(|w| b.weights.contains(*w)) else {
        return false;
    };
    match (&a.support, &b.support) {
        (None, None) => true,
        (Some(s), None) | (None, Some(s)) => s.iter().any(|m| m.count_ones() as usize >= w),
        (Some(x), Some(y)) => x.iter().any(|p| y.iter().any(|q| (p & q).count_ones() as usize >= w)),
    }
}

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Generators of a sector whose support is exactly a given `w`-qubit set.
pub fn per_support_count(sector: Sector, w: usize) -> BigUint {
    if w == 0 {
        return BigUint::ZERO;
    }
    match sector {
        Sector::H | Sector::S => BigUint::from(3u32).pow(w as u32),
        Sector::C | Sector::A => {
            // Pairs of distinct non-identity Paulis inside a k-qubit set,
            // then inclusion-exclusion down to exact support.
            let pairs = |k: usize| -> BigInt {
                let m = BigInt::from(4u32).pow(k as u32) - 1;
                &m * (&m - 1) / 2
            };
            let mut total = BigInt::ZERO;
            for j in 0..=w {
                let term = BigInt::from(binomial(w, j)) * pairs(j);
                if (w - j).is_multiple_of(2) {
                    total += term;
                } else {
                    total -= term;
                }
            }
            total.to_biguint().expect("count is non-negative")
        }
    }
}

/// Number of distinct `w`-subsets lying inside at least one set of the
/// family, by inclusion-exclusion over intersections.
fn supports_of_size(term: &ModelTerm, n_qubits: usize, w: usize) -> BigUint {
    let Some(sets) = &term.support else {
        return binomial(n_qubits, w);
    };
    let mut total = BigInt::ZERO;
    for pick in 1u32..(1u32 << sets.len()) {
        let inter = sets.iter().enumerate().filter(|(i, _)| (pick >> i) & 1 == 1).fold(u64::MAX, |acc, (_, s)| acc & s);
        let c = BigInt::from(binomial(inter.count_ones() as usize, w));
        if pick.count_ones() % 2 == 1 {
            total += c;
        } else {
            total -= c;
        }
    }
    total.to_biguint().unwrap_or_default()
}

/// Per sector and weight counts of a single term.
pub fn term_breakdown(term: &ModelTerm, n_qubits: usize) -> Vec<(usize, BigUint)> {
    term.weights
        .range(n_qubits)
        .map(|w| (w, per_support_count(term.sector, w) * supports_of_size(term, n_qubits, w)))
        .filter(|(_, c)| *c != BigUint::ZERO)
        .collect()
}

/// Closed-form parameter count; works far past the dense limit.
pub fn parameter_count(spec: &ModelSpec) -> BigUint {
    let plain: BigUint = spec.terms.iter().flat_map(|t| term_breakdown(t, spec.n_qubits)).map(|(_, c)| c).sum();
    plain + BigUint::from(spec.composites.len())
}

/// Counts per sector, plain terms only.
pub fn sector_counts(spec: &ModelSpec) -> BTreeMap<Sector, BigUint> {
    let mut out = BTreeMap::new();
    for t in &spec.terms {
        let c: BigUint = term_breakdown(t, spec.n_qubits).into_iter().map(|(_, c)| c).sum();
        *out.entry(t.sector).or_insert(BigUint::ZERO) += c;
    }
    out
}

/// All `w`-subsets of the qubits in `mask`.
fn subsets_of_size(mask: u64, w: usize) -> Vec<u64> {
    fn walk(qubits: &[u32], w: usize, acc: u64, out: &mut Vec<u64>) {
        if w == 0 {
            out.push(acc);
            return;
        }
        for i in 0..=qubits.len() - w {
            walk(&qubits[i + 1..], w - 1, acc | 1 << qubits[i], out);
        }
    }
    let qubits: Vec<u32> = (0..64).filter(|q| (mask >> q) & 1 == 1).collect();
    let mut out = Vec::new();
    if w <= qubits.len() {
        walk(&qubits, w, 0, &mut out);
    }
    out
}

/// Every Pauli whose support is exactly `mask` (`exact`) or inside it.
fn paulis_on(n_qubits: usize, mask: u64, exact: bool) -> Vec<PauliString> {
    let qubits: Vec<u32> = (0..64).filter(|q| (mask >> q) & 1 == 1).collect();
    let mut out = Vec::new();
    let base: u64 = if exact { 3 } else { 4 };
    for code in 0..base.pow(qubits.len() as u32) {
        let (mut x, mut z, mut c) = (0u64, 0u64, code);
        for &q in &qubits {
            let letter = if exact { c % 3 + 1 } else { c % 4 };
            c /= base;
            let (xb, zb) = match letter {
                0 => (0, 0),
                1 => (1, 0),
                2 => (1, 1),
                _ => (0, 1),
            };
            x |= xb << q;
            z |= zb << q;
        }
        if x | z != 0 {
            out.push(PauliString::from_bits(n_qubits, x, z).expect("mask inside register"));
        }
    }
    out
}

fn labels_with_support(sector: Sector, n_qubits: usize, mask: u64, out: &mut Vec<GeneratorLabel>) {
    if !sector.is_pair() {
        for p in paulis_on(n_qubits, mask, true) {
            out.push(GeneratorLabel::new(sector, p, None).expect("non-identity"));
        }
        return;
    }
    let mut inside = paulis_on(n_qubits, mask, false);
    inside.sort();
    for (i, p) in inside.iter().enumerate() {
        for q in &inside[i + 1..] {
            if (p.support_mask() | q.support_mask()) == mask {
                out.push(GeneratorLabel::new(sector, *p, Some(*q)).expect("canonical"));
            }
        }
    }
}

/// Explicit labels of a model, sorted. Composites contribute their
/// component labels.
pub fn labels_of(spec: &ModelSpec) -> Result<Vec<GeneratorLabel>> {
    let n = spec.n_qubits;
    if n > MAX_QUBITS {
        return Err(Error::InvalidModel(format!("cannot enumerate labels on {n} qubits")));
    }
    let count = parameter_count(spec);
    if count > BigUint::from(ENUMERATION_LIMIT) {
        return Err(Error::InvalidModel(format!("{count} labels is too many to enumerate; use the symbolic count")));
    }
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut out = Vec::new();
    for t in &spec.terms {
        for w in t.weights.range(n) {
            let supports: BTreeSet<u64> = match &t.support {
                None => subsets_of_size(full, w).into_iter().collect(),
                Some(sets) => sets.iter().flat_map(|s| subsets_of_size(*s, w)).collect(),
            };
            for mask in supports {
                labels_with_support(t.sector, n, mask, &mut out);
            }
        }
    }
    for c in &spec.composites {
        out.extend(c.components.iter().map(|(l, _)| *l));
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Result of projecting rates onto a model.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub in_model: ErrorGeneratorRates,
    pub residual: ErrorGeneratorRates,
    /// Euclidean norm of the residual rates in each sector.
    pub residual_norms: BTreeMap<Sector, f64>,
    /// Fitted coefficient of each composite direction.
    pub composite_coefficients: Vec<(String, f64)>,
}

/// Keeps the rates on plain-term labels, fits composite directions to the
/// rest by least squares, and returns everything else as residual.
pub fn project(rates: &ErrorGeneratorRates, spec: &ModelSpec) -> Result<Projection> {
    if rates.n_qubits() != spec.n_qubits {
        return Err(Error::QubitMismatch { left: spec.n_qubits, right: rates.n_qubits() });
    }
    let mut in_model = ErrorGeneratorRates::new(rates.n_qubits(), rates.convention());
    for (l, v) in rates.iter() {
        if spec.contains(l) {
            in_model.set(*l, v)?;
        }
    }
    let mut coefficients = Vec::new();
    if !spec.composites.is_empty() {
        let mut rows: BTreeMap<GeneratorLabel, usize> = BTreeMap::new();
        for c in &spec.composites {
            for (l, _) in &c.components {
                let next = rows.len();
                rows.entry(*l).or_insert(next);
            }
        }
        let mut a = DMatrix::<f64>::zeros(rows.len(), spec.composites.len());
        for (k, c) in spec.composites.iter().enumerate() {
            for (l, v) in &c.components {
                a[(rows[l], k)] = *v;
            }
        }
        let mut b = DVector::<f64>::zeros(rows.len());
        for (l, &i) in &rows {
            b[i] = rates.get(l);
        }
        let alpha = a
            .clone()
            .svd(true, true)
            .solve(&b, 1e-12)
            .map_err(|e| Error::InvalidModel(format!("composite least squares failed: {e}")))?;
        let fitted = &a * &alpha;
        for (l, &i) in &rows {
            in_model.add(*l, fitted[i])?;
        }
        for (k, c) in spec.composites.iter().enumerate() {
            coefficients.push((c.name.clone(), alpha[k]));
        }
    }
    let residual = rates.sub(&in_model)?;
    let mut residual_norms = BTreeMap::new();
    for s in Sector::ALL {
        residual_norms.insert(s, residual.sector(s).norm());
    }
    Ok(Projection { in_model, residual, residual_norms, composite_coefficients: coefficients })
}

/// Extraction, projection and reconstruction in one pass.
#[derive(Clone, Debug)]
pub struct ModelFit {
    pub projection: Projection,
    /// `||L - L_model||_F / ||L||_F` on the generator matrices.
    pub residual_fraction: f64,
    pub reconstructed: ProcessMatrix,
    /// Entanglement fidelity of the reconstructed process to the gate.
    pub fidelity_of_reconstruction: f64,
}

pub fn validate_model_fit(
    gate: &ProcessMatrix,
    target: &ProcessMatrix,
    spec: &ModelSpec,
    convention: Convention,
) -> Result<ModelFit> {
    let l = extract_error_generator(gate, target, convention)?;
    let rates = crate::generators::decompose(&l, convention)?;
    let projection = project(&rates, spec)?;
    let l_model = reconstruct(&projection.in_model)?;
    let norm = l.matrix().norm();
    let residual_fraction = if norm == 0.0 { 0.0 } else { l.frobenius_distance(&l_model)? / norm };
    let reconstructed = process_from_rates(&projection.in_model, target)?;
    let fidelity = entanglement_fidelity(&reconstructed, gate)?.value;
    Ok(ModelFit { projection, residual_fraction, reconstructed, fidelity_of_reconstruction: fidelity })
}

/// Per-gate models, read from `{"qubits": N, "gates": {"Gx": "H+S", ...}}`.
#[derive(Clone, Debug)]
pub struct GateSetModel {
    pub n_qubits: usize,
    pub gates: BTreeMap<String, ModelSpec>,
}

#[derive(Serialize, Deserialize)]
struct GateSetFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    qubits: Option<usize>,
    gates: BTreeMap<String, String>,
}

impl GateSetModel {
    /// `n_qubits` is used when the file does not name a register size.
    pub fn from_json(text: &str, n_qubits: Option<usize>) -> Result<Self> {
        let file: GateSetFile = serde_json::from_str(text)?;
        let n = match (file.qubits, n_qubits) {
            (Some(a), Some(b)) if a != b => return Err(Error::QubitMismatch { left: a, right: b }),
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(Error::InvalidModel("gate set needs a qubit count".into())),
        };
        let mut gates = BTreeMap::new();
        for (name, spec) in file.gates {
            let m = ModelSpec::parse(&spec, n).map_err(|e| Error::InvalidModel(format!("gate {name}: {e}")))?;
            gates.insert(name, m);
        }
        Ok(GateSetModel { n_qubits: n, gates })
    }

    pub fn to_json(&self) -> Result<String> {
        let file = GateSetFile {
            qubits: Some(self.n_qubits),
            gates: self.gates.iter().map(|(k, v)| (k.clone(), v.to_string())).collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn parameter_count(&self) -> BigUint {
        self.gates.values().map(parameter_count).sum()
    }
}

/// Labels per sector for quick summaries.
pub fn group_by_sector(labels: &[GeneratorLabel]) -> HashMap<Sector, usize> {
    let mut out = HashMap::new();
    for l in labels {
        *out.entry(l.sector()).or_insert(0) += 1;
    }
    out
}
