//! Jamiolkowski probability/amplitude and entanglement fidelity.
//!
//! In the Bell basis `(P (x) 1)|Psi>` the Jamiolkowski operator of a map is
//! its chi matrix, so `<Psi|rho_J(L)|Psi> = chi_II(L)` and the part of
//! `rho_J(L)|Psi>` orthogonal to `|Psi>` has components `chi_{Q,I}`.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::{extract_error_generator, Convention, ErrorGeneratorRates, Sector, GENERATOR_TP_TOL};
use crate::pauli::{all_paulis, PauliString};
use crate::superop::{check_process, chi_entry, ProcessMatrix};

/// Scaling statement attached to every report; the diamond norm itself is
/// not computed.
pub const DIAMOND_NOTE: &str =
    "diamond-norm error is not computed; it scales as O(epsilon_j + theta_j) and depends on details beyond these two numbers";

fn require_generator(l: &ProcessMatrix) -> Result<()> {
    let dev = l.generator_tp_deviation();
    if dev > GENERATOR_TP_TOL {
        return Err(Error::NotTracePreserving(dev));
    }
    Ok(())
}

/// `epsilon_J(L) = -<Psi|rho_J(L)|Psi> = -Tr(L)/d^2`.
pub fn j_probability(l: &ProcessMatrix) -> Result<f64> {
    require_generator(l)?;
    Ok(-l.matrix().trace() / l.dim() as f64)
}

/// `theta_J(L) = ||(1 - |Psi><Psi|) rho_J(L) |Psi>||`.
pub fn j_amplitude(l: &ProcessMatrix) -> Result<f64> {
    require_generator(l)?;
    let n = l.n_qubits();
    let id = PauliString::identity(n)?;
    let sum = all_paulis(n).iter().skip(1).fold(0.0, |acc, q| acc + chi_entry(l, q, &id).norm_sqr());
    Ok(sum.sqrt())
}

/// `sum_P s_P`.
pub fn j_probability_from_rates(rates: &ErrorGeneratorRates) -> f64 {
    rates.iter().filter(|(l, _)| l.sector() == Sector::S).fold(0.0, |acc, (_, v)| acc + v)
}

/// Collects the `chi_{Q,I}` column from the Choi sums of each label: H
/// contributes `-i h_Q`, commuting C pairs and anticommuting A pairs
/// contribute real amounts on their product Pauli.
pub fn j_amplitude_from_rates(rates: &ErrorGeneratorRates) -> f64 {
    let mut column: HashMap<PauliString, Complex64> = HashMap::new();
    for (label, rate) in rates.iter() {
        for t in label.choi_terms() {
            if t.right.is_identity() && !t.left.is_identity() {
                *column.entry(t.left).or_default() += t.coeff * rate;
            }
        }
    }
    column.values().fold(0.0, |acc, v| acc + v.norm_sqr()).sqrt()
}

/// Entanglement fidelity of `gate` to `target`, `Tr(G target^-1)/d^2`, with
/// warnings for inputs that are not CPTP.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fidelity {
    pub value: f64,
    pub warnings: Vec<String>,
}

pub fn entanglement_fidelity(gate: &ProcessMatrix, target: &ProcessMatrix) -> Result<Fidelity> {
    let error = gate.compose(&target.inverse()?)?;
    let mut warnings = Vec::new();
    for (name, m) in [("gate", gate), ("target", target)] {
        let d = check_process(m)?;
        if !d.is_tp {
            warnings.push(format!("{name} is not trace preserving (deviation {:.3e})", d.tp_deviation));
        }
        if !d.is_cp {
            warnings
                .push(format!("{name} is not completely positive (min Choi eigenvalue {:.3e})", d.min_choi_eigenvalue));
        }
    }
    Ok(Fidelity { value: error.matrix().trace() / error.dim() as f64, warnings })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub epsilon_j: f64,
    pub theta_j: f64,
    pub fidelity: Option<f64>,
    pub fidelity_approx: f64,
    pub notes: Vec<String>,
}

impl MetricsReport {
    pub fn from_generator(l: &ProcessMatrix) -> Result<Self> {
        let epsilon_j = j_probability(l)?;
        let theta_j = j_amplitude(l)?;
        Ok(MetricsReport {
            epsilon_j,
            theta_j,
            fidelity: None,
            fidelity_approx: 1.0 - (epsilon_j + theta_j * theta_j),
            notes: vec![DIAMOND_NOTE.to_string()],
        })
    }

    pub fn from_rates(rates: &ErrorGeneratorRates) -> Self {
        let epsilon_j = j_probability_from_rates(rates);
        let theta_j = j_amplitude_from_rates(rates);
        MetricsReport {
            epsilon_j,
            theta_j,
            fidelity: None,
            fidelity_approx: 1.0 - (epsilon_j + theta_j * theta_j),
            notes: vec![DIAMOND_NOTE.to_string()],
        }
    }
}

/// Extract the error generator of `gate` and report its metrics together
/// with the exact entanglement fidelity.
pub fn metrics_report(gate: &ProcessMatrix, target: &ProcessMatrix, convention: Convention) -> Result<MetricsReport> {
    let l = extract_error_generator(gate, target, convention)?;
    let mut report = MetricsReport::from_generator(&l)?;
    let f = entanglement_fidelity(gate, target)?;
    report.fidelity = Some(f.value);
    if report.epsilon_j < -GENERATOR_TP_TOL {
        report.notes.push("negative epsilon_j: the error process is not infinitely divisible".into());
    }
    report.notes.extend(f.warnings);
    Ok(report)
}
