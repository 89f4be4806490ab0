//! Decomposition reports: one in-memory document rendered as an aligned
//! text table or as JSON that also loads as a rates file.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::Result;
use crate::generators::{
    stochastic_constraints, Convention, ErrorGeneratorRates, Sector, StochasticReport, REPORT_FLOOR, STOCHASTIC_TOL,
};
use crate::io::RateEntry;
use crate::metrics::MetricsReport;
use crate::models::{parameter_count, ModelSpec, Projection};
use crate::superop::ProcessDiagnostics;

/// Default display threshold for the text table.
pub const DEFAULT_THRESHOLD: f64 = 1e-12;

pub const NEGATIVE_RATE_NOTE: &str = "NEGATIVE RATE on a stochastic generator: the error process is not infinitely divisible, so no Lindbladian with non-negative rates produces it (compare with --convention diff)";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectorSummary {
    pub count: usize,
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelSummary {
    pub spec: String,
    pub parameters: String,
    pub residual_norms: BTreeMap<Sector, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub composites: Vec<(String, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportDocument {
    pub qubits: usize,
    pub convention: Convention,
    /// Sector order, then decreasing magnitude. Rates below the numerical
    /// floor are omitted; everything else is kept at full precision.
    pub rates: Vec<RateEntry>,
    pub threshold: f64,
    pub sectors: BTreeMap<Sector, SectorSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<ProcessDiagnostics>,
    pub stochastic: StochasticReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSummary>,
    pub notes: Vec<String>,
}

impl ReportDocument {
    pub fn new(rates: &ErrorGeneratorRates, threshold: f64) -> Self {
        let kept = rates.above(REPORT_FLOOR);
        let mut entries = Vec::new();
        let mut sectors = BTreeMap::new();
        for s in Sector::ALL {
            let part = kept.sector(s);
            sectors.insert(s, SectorSummary { count: part.len(), norm: part.norm() });
            entries.extend(part.by_magnitude().iter().map(|(l, v)| RateEntry::new(l, *v)));
        }
        let stochastic = stochastic_constraints(&kept);
        let mut notes = Vec::new();
        if !stochastic.negative_rates.is_empty() {
            notes.push(NEGATIVE_RATE_NOTE.to_string());
        }
        ReportDocument {
            qubits: rates.n_qubits(),
            convention: rates.convention(),
            rates: entries,
            threshold,
            sectors,
            metrics: None,
            diagnostics: None,
            stochastic,
            model: None,
            notes,
        }
    }

    pub fn with_metrics(mut self, metrics: MetricsReport) -> Self {
        self.metrics = Some(metrics);
        self
    }

    pub fn with_diagnostics(mut self, diagnostics: ProcessDiagnostics) -> Self {
        self.diagnostics = Some(diagnostics);
        self
    }

    pub fn with_model(mut self, spec: &ModelSpec, projection: &Projection) -> Self {
        self.model = Some(ModelSummary {
            spec: spec.to_string(),
            parameters: parameter_count(spec).to_string(),
            residual_norms: projection.residual_norms.clone(),
            composites: projection.composite_coefficients.clone(),
        });
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "qubits: {}   convention: {}", self.qubits, self.convention);
        let shown: Vec<&RateEntry> = self.rates.iter().filter(|e| e.rate.abs() >= self.threshold).collect();
        if shown.is_empty() {
            let _ = writeln!(out, "no rates above {:e}", self.threshold);
        } else {
            let names: Vec<String> = shown.iter().map(|e| label_text(e)).collect();
            let width = names.iter().map(String::len).max().unwrap_or(0).max(5);
            let _ = writeln!(out, "{:<width$}  {:>14}", "label", "rate");
            let mut last = None;
            for (e, name) in shown.iter().zip(&names) {
                if last != Some(e.kind) {
                    let _ = writeln!(out, "-- {} ({}) --", e.kind, e.kind.name());
                    last = Some(e.kind);
                }
                let flag = if e.kind == Sector::S && e.rate < -STOCHASTIC_TOL { "  NEGATIVE RATE" } else { "" };
                let _ = writeln!(out, "{name:<width$}  {:>14.6e}{flag}", e.rate);
            }
        }
        let _ = writeln!(out);
        for (s, sum) in &self.sectors {
            let _ = writeln!(out, "{s}: {:>6} rates, norm {:.6e}", sum.count, sum.norm);
        }
        if let Some(m) = &self.metrics {
            let _ = writeln!(out);
            let _ = writeln!(out, "epsilon_J       {:.6e}", m.epsilon_j);
            let _ = writeln!(out, "theta_J         {:.6e}", m.theta_j);
            if let Some(f) = m.fidelity {
                let _ = writeln!(out, "fidelity        {:.12}", f);
            }
            let _ = writeln!(out, "1-(eps+theta^2) {:.12}", m.fidelity_approx);
        }
        if let Some(d) = &self.diagnostics {
            let _ = writeln!(
                out,
                "gate: tp={} unital={} cp={} (min Choi eigenvalue {:.3e})",
                d.is_tp, d.is_unital, d.is_cp, d.min_choi_eigenvalue
            );
        }
        if !self.stochastic.is_clean() {
            let _ = writeln!(
                out,
                "stochastic tensor: psd={} (min eigenvalue {:.3e}), {} bound violation(s)",
                self.stochastic.tensor_psd,
                self.stochastic.min_eigenvalue,
                self.stochastic.violations.len()
            );
        }
        if let Some(m) = &self.model {
            let _ = writeln!(out);
            let _ = writeln!(out, "model {} ({} parameters)", m.spec, m.parameters);
            for (s, v) in &m.residual_norms {
                let _ = writeln!(out, "  residual {s}: {v:.6e}");
            }
            for (name, c) in &m.composites {
                let _ = writeln!(out, "  {name}: {c:.6e}");
            }
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

fn label_text(e: &RateEntry) -> String {
    match &e.q {
        Some(q) => format!("{}:{},{}", e.kind, e.p, q),
        None => format!("{}:{}", e.kind, e.p),
    }
}
