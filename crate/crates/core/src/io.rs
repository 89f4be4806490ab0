//! JSON file formats for channels and rates.
//!
//! Channel: `{"qubits": N, "rep": "ptm"|"chi", "basis": "pauli-normalized",
//! "matrix": [[...], ...]}` with chi entries written as `[re, im]`.
//!
//! Rates: `{"qubits": N, "convention": "logarithm"|"difference",
//! "rates": [{"kind": "H", "p": "Y", "rate": 0.03}, {"kind": "C", "p": "IX",
//! "q": "ZX", "rate": ...}]}`. Unknown top-level fields are ignored, so
//! decomposition reports load as rates files.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{Convention, ErrorGeneratorRates, GeneratorLabel, Sector};
use crate::pauli::PauliString;
use crate::superop::{chi_from_ptm, ptm_from_chi, superop_dim, ChiMatrix, ProcessMatrix};

pub const BASIS: &str = "pauli-normalized";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    #[default]
    Ptm,
    Chi,
}

#[derive(Serialize, Deserialize)]
struct ChannelFile {
    qubits: usize,
    #[serde(default)]
    rep: Representation,
    #[serde(default = "default_basis")]
    basis: String,
    matrix: serde_json::Value,
}

fn default_basis() -> String {
    BASIS.to_string()
}

fn rows_of(value: &serde_json::Value, dim: usize) -> Result<&Vec<serde_json::Value>> {
    let rows = value.as_array().ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?;
    if rows.len() != dim {
        return Err(Error::BadShape { rows: rows.len(), cols: dim, expected: dim });
    }
    Ok(rows)
}

fn real(v: &serde_json::Value) -> Result<f64> {
    v.as_f64().ok_or_else(|| Error::Parse(format!("expected a number, got {v}")))
}

pub fn channel_from_json(text: &str) -> Result<ProcessMatrix> {
    let file: ChannelFile = serde_json::from_str(text)?;
    if file.basis != BASIS {
        return Err(Error::Parse(format!("unsupported basis {:?}, expected {BASIS:?}", file.basis)));
    }
    if file.qubits == 0 {
        return Err(Error::InvalidQubitCount(0));
    }
    crate::superop::check_dense(file.qubits)?;
    let dim = superop_dim(file.qubits);
    let rows = rows_of(&file.matrix, dim)?;
    let mut cols_seen = Vec::with_capacity(dim);
    for r in rows {
        let cols = r.as_array().ok_or_else(|| Error::Parse("matrix row must be an array".into()))?;
        cols_seen.push(cols);
        if cols.len() != dim {
            return Err(Error::BadShape { rows: dim, cols: cols.len(), expected: dim });
        }
    }
    match file.rep {
        Representation::Ptm => {
            let mut m = DMatrix::<f64>::zeros(dim, dim);
            for (i, cols) in cols_seen.iter().enumerate() {
                for (j, v) in cols.iter().enumerate() {
                    m[(i, j)] = real(v)?;
                }
            }
            ProcessMatrix::new(file.qubits, m)
        }
        Representation::Chi => {
            let mut m = DMatrix::<Complex64>::zeros(dim, dim);
            for (i, cols) in cols_seen.iter().enumerate() {
                for (j, v) in cols.iter().enumerate() {
                    m[(i, j)] = match v {
                        serde_json::Value::Array(pair) if pair.len() == 2 => {
                            Complex64::new(real(&pair[0])?, real(&pair[1])?)
                        }
                        other => Complex64::new(real(other)?, 0.0),
                    };
                }
            }
            ptm_from_chi(&ChiMatrix::new(file.qubits, m)?)
        }
    }
}

/// serde_json writes the shortest string that parses back to the same
/// `f64`, so values round-trip exactly.
pub fn channel_to_json(ptm: &ProcessMatrix, rep: Representation) -> Result<String> {
    let dim = ptm.dim();
    let matrix = match rep {
        Representation::Ptm => {
            let rows: Vec<Vec<f64>> = (0..dim).map(|i| ptm.matrix().row(i).iter().copied().collect()).collect();
            serde_json::to_value(rows)?
        }
        Representation::Chi => {
            let chi = chi_from_ptm(ptm)?;
            let rows: Vec<Vec<[f64; 2]>> =
                (0..dim).map(|i| chi.matrix().row(i).iter().map(|c| [c.re, c.im]).collect()).collect();
            serde_json::to_value(rows)?
        }
    };
    let file = ChannelFile { qubits: ptm.n_qubits(), rep, basis: BASIS.to_string(), matrix };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn read_channel(path: impl AsRef<Path>) -> Result<ProcessMatrix> {
    channel_from_json(&fs::read_to_string(path)?)
}

pub fn write_channel(path: impl AsRef<Path>, ptm: &ProcessMatrix, rep: Representation) -> Result<()> {
    fs::write(path, channel_to_json(ptm, rep)? + "\n")?;
    Ok(())
}

/// One entry of the `rates` array.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEntry {
    pub kind: Sector,
    pub p: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    pub rate: f64,
}

impl RateEntry {
    pub fn new(label: &GeneratorLabel, rate: f64) -> Self {
        RateEntry { kind: label.sector(), p: label.p().to_string(), q: label.q().map(|q| q.to_string()), rate }
    }

    pub fn label(&self) -> Result<GeneratorLabel> {
        let p: PauliString = self.p.parse()?;
        let q = self.q.as_deref().map(str::parse::<PauliString>).transpose()?;
        GeneratorLabel::new(self.kind, p, q)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatesFile {
    pub qubits: usize,
    #[serde(default)]
    pub convention: Convention,
    pub rates: Vec<RateEntry>,
}

impl RatesFile {
    pub fn from_rates(rates: &ErrorGeneratorRates) -> Self {
        RatesFile {
            qubits: rates.n_qubits(),
            convention: rates.convention(),
            rates: rates.iter().map(|(l, v)| RateEntry::new(l, v)).collect(),
        }
    }

    /// Duplicate labels are an error rather than summed.
    pub fn into_rates(self) -> Result<ErrorGeneratorRates> {
        let mut out = ErrorGeneratorRates::new(self.qubits, self.convention);
        for e in &self.rates {
            let label = e.label()?;
            if label.n_qubits() != self.qubits {
                return Err(Error::QubitMismatch { left: self.qubits, right: label.n_qubits() });
            }
            if out.get(&label) != 0.0 {
                return Err(Error::Parse(format!("duplicate rate for {label}")));
            }
            if !e.rate.is_finite() {
                return Err(Error::Parse(format!("rate for {label} is not finite")));
            }
            out.set(label, e.rate)?;
        }
        Ok(out)
    }
}

pub fn rates_from_json(text: &str) -> Result<ErrorGeneratorRates> {
    serde_json::from_str::<RatesFile>(text)?.into_rates()
}

pub fn rates_to_json(rates: &ErrorGeneratorRates) -> Result<String> {
    Ok(serde_json::to_string_pretty(&RatesFile::from_rates(rates))?)
}

pub fn read_rates(path: impl AsRef<Path>) -> Result<ErrorGeneratorRates> {
    rates_from_json(&fs::read_to_string(path)?)
}

pub fn write_rates(path: impl AsRef<Path>, rates: &ErrorGeneratorRates) -> Result<()> {
    fs::write(path, rates_to_json(rates)? + "\n")?;
    Ok(())
}
