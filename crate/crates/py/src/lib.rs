//! Python bindings. Rates cross the boundary as `{"KIND:P[,Q]": rate}`
//! dicts and process matrices as nested lists in the normalized Pauli basis.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use errgen::io::{channel_from_json, channel_to_json, Representation};
use errgen::models::sector_counts;
use errgen::{
    check_process, decompose as decompose_rates, dual_generator, elementary_generator, extract_error_generator,
    ideal_target as ideal, labels_of as model_labels, make_channel as build_channel, metrics::metrics_report,
    parameter_count as model_count, project as project_rates, reconstruct as reconstruct_rates, ChannelKind,
    ChannelSpec, Convention, Error, ErrorGeneratorRates, GeneratorLabel, ModelSpec, PauliString, ProcessMatrix,
};

create_exception!(errgen, NoRealLogarithmError, PyValueError);
create_exception!(errgen, NotTracePreservingError, PyValueError);
create_exception!(errgen, InvalidModelError, PyValueError);

fn ok<T>(r: errgen::Result<T>) -> PyResult<T> {
    r.map_err(|e| match e {
        Error::NoRealLogarithm(_) => NoRealLogarithmError::new_err(e.to_string()),
        Error::NotTracePreserving(_) => NotTracePreservingError::new_err(e.to_string()),
        Error::InvalidModel(_) => InvalidModelError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    })
}

fn convention(text: &str) -> PyResult<Convention> {
    ok(text.parse())
}

#[pyclass(name = "PauliString", module = "errgen", frozen, skip_from_py_object, eq, hash)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyPauli(PauliString);

#[pymethods]
impl PyPauli {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        ok(text.parse().map(PyPauli))
    }

    #[staticmethod]
    fn from_index(n_qubits: usize, index: u128) -> PyResult<Self> {
        ok(PauliString::from_index(n_qubits, index).map(PyPauli))
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.0.n_qubits()
    }

    #[getter]
    fn index(&self) -> u128 {
        self.0.index()
    }

    #[getter]
    fn weight(&self) -> usize {
        self.0.weight()
    }

    #[getter]
    fn support(&self) -> Vec<usize> {
        self.0.support()
    }

    fn commutes(&self, other: &PyPauli) -> PyResult<bool> {
        ok(self.0.commutes(&other.0))
    }

    /// `(phase, pauli)` with `self * other = phase * pauli`.
    fn __mul__(&self, other: &PyPauli) -> PyResult<(Complex64, PyPauli)> {
        let p = ok(self.0.product(&other.0))?;
        Ok((p.phase.to_complex(), PyPauli(p.pauli)))
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("PauliString('{}')", self.0)
    }
}

#[pyclass(name = "GeneratorLabel", module = "errgen", frozen, skip_from_py_object, eq, hash)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyLabel(GeneratorLabel);

#[pymethods]
impl PyLabel {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        ok(text.parse().map(PyLabel))
    }

    #[getter]
    fn sector(&self) -> String {
        self.0.sector().to_string()
    }

    #[getter]
    fn p(&self) -> PyPauli {
        PyPauli(self.0.p())
    }

    #[getter]
    fn q(&self) -> Option<PyPauli> {
        self.0.q().map(PyPauli)
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.0.n_qubits()
    }

    #[getter]
    fn weight(&self) -> usize {
        self.0.weight()
    }

    #[getter]
    fn support(&self) -> Vec<usize> {
        self.0.support()
    }

    fn generator(&self) -> PyResult<PyProcess> {
        ok(elementary_generator(&self.0).map(PyProcess))
    }

    fn dual(&self) -> PyResult<PyProcess> {
        ok(dual_generator(&self.0).map(PyProcess))
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("GeneratorLabel('{}')", self.0)
    }
}

/// Real superoperator in the normalized Pauli basis.
#[pyclass(name = "ProcessMatrix", module = "errgen", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyProcess(ProcessMatrix);

#[pymethods]
impl PyProcess {
    /// Square nested list of side `4^n`.
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let dim = rows.len();
        let n = (dim.trailing_zeros() / 2) as usize;
        if dim == 0 || 1usize << (2 * n) != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(PyValueError::new_err(format!("expected a square matrix of side 4^n, got {dim} rows")));
        }
        let m = DMatrix::from_row_slice(dim, dim, &rows.concat());
        ok(ProcessMatrix::new(n, m).map(PyProcess))
    }

    #[staticmethod]
    fn identity(n_qubits: usize) -> PyResult<Self> {
        ok(ProcessMatrix::identity(n_qubits).map(PyProcess))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        ok(channel_from_json(text).map(PyProcess))
    }

    #[pyo3(signature = (rep = "ptm"))]
    fn to_json(&self, rep: &str) -> PyResult<String> {
        let rep = match rep {
            "ptm" => Representation::Ptm,
            "chi" => Representation::Chi,
            other => return Err(PyValueError::new_err(format!("unknown representation '{other}'"))),
        };
        ok(channel_to_json(&self.0, rep))
    }

    fn to_list(&self) -> Vec<Vec<f64>> {
        let m = self.0.matrix();
        (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.0.n_qubits()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    /// `self` applied after `first`.
    fn compose(&self, first: &PyProcess) -> PyResult<PyProcess> {
        ok(self.0.compose(&first.0).map(PyProcess))
    }

    fn inverse(&self) -> PyResult<PyProcess> {
        ok(self.0.inverse().map(PyProcess))
    }

    fn log(&self) -> PyResult<PyProcess> {
        ok(self.0.log().map(PyProcess))
    }

    fn exp(&self) -> PyResult<PyProcess> {
        ok(self.0.exp().map(PyProcess))
    }

    fn scaled(&self, factor: f64) -> PyProcess {
        PyProcess(self.0.scaled(factor))
    }

    fn distance(&self, other: &PyProcess) -> PyResult<f64> {
        ok(self.0.frobenius_distance(&other.0))
    }

    fn check<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = ok(check_process(&self.0))?;
        let out = PyDict::new(py);
        out.set_item("is_tp", d.is_tp)?;
        out.set_item("is_unital", d.is_unital)?;
        out.set_item("is_cp", d.is_cp)?;
        out.set_item("min_choi_eigenvalue", d.min_choi_eigenvalue)?;
        out.set_item("tp_deviation", d.tp_deviation)?;
        out.set_item("unital_deviation", d.unital_deviation)?;
        out.set_item("distance_to_identity", d.distance_to_identity)?;
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!("ProcessMatrix(n_qubits={})", self.0.n_qubits())
    }
}

fn rates_to_dict<'py>(py: Python<'py>, rates: &ErrorGeneratorRates) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    for (l, v) in rates.iter() {
        out.set_item(l.to_string(), v)?;
    }
    Ok(out)
}

fn rates_from_dict(
    rates: HashMap<String, f64>,
    n_qubits: Option<usize>,
    conv: Convention,
) -> PyResult<ErrorGeneratorRates> {
    let labels: Vec<(GeneratorLabel, f64)> =
        rates.into_iter().map(|(k, v)| ok(k.parse::<GeneratorLabel>()).map(|l| (l, v))).collect::<PyResult<_>>()?;
    let n = match (n_qubits, labels.first()) {
        (Some(n), _) => n,
        (None, Some((l, _))) => l.n_qubits(),
        (None, None) => return Err(PyValueError::new_err("n_qubits is required for an empty rates dict")),
    };
    ok(ErrorGeneratorRates::from_pairs(n, conv, labels))
}

fn target_or_identity(target: Option<&PyProcess>, n: usize) -> PyResult<ProcessMatrix> {
    match target {
        Some(t) => Ok(t.0.clone()),
        None => ok(ProcessMatrix::identity(n)),
    }
}

/// `log(gate target^-1)` or `gate target^-1 - 1`.
#[pyfunction]
#[pyo3(signature = (gate, target = None, convention = "log"))]
fn error_generator(gate: &PyProcess, target: Option<&PyProcess>, convention: &str) -> PyResult<PyProcess> {
    let t = target_or_identity(target, gate.0.n_qubits())?;
    ok(extract_error_generator(&gate.0, &t, self::convention(convention)?).map(PyProcess))
}

/// Elementary rates of a TP generator.
#[pyfunction]
#[pyo3(signature = (generator, convention = "log"))]
fn decompose<'py>(py: Python<'py>, generator: &PyProcess, convention: &str) -> PyResult<Bound<'py, PyDict>> {
    let rates = ok(decompose_rates(&generator.0, self::convention(convention)?))?;
    rates_to_dict(py, &rates)
}

/// Extraction and decomposition in one call.
#[pyfunction]
#[pyo3(signature = (gate, target = None, convention = "log"))]
fn decompose_gate<'py>(
    py: Python<'py>,
    gate: &PyProcess,
    target: Option<&PyProcess>,
    convention: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let conv = self::convention(convention)?;
    let t = target_or_identity(target, gate.0.n_qubits())?;
    let l = ok(extract_error_generator(&gate.0, &t, conv))?;
    rates_to_dict(py, &ok(decompose_rates(&l, conv))?)
}

#[pyfunction]
#[pyo3(signature = (rates, n_qubits = None))]
fn reconstruct(rates: HashMap<String, f64>, n_qubits: Option<usize>) -> PyResult<PyProcess> {
    let r = rates_from_dict(rates, n_qubits, Convention::Logarithm)?;
    ok(reconstruct_rates(&r).map(PyProcess))
}

#[pyfunction]
#[pyo3(signature = (gate, target = None, convention = "log"))]
fn metrics<'py>(
    py: Python<'py>,
    gate: &PyProcess,
    target: Option<&PyProcess>,
    convention: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let t = target_or_identity(target, gate.0.n_qubits())?;
    let m = ok(metrics_report(&gate.0, &t, self::convention(convention)?))?;
    let out = PyDict::new(py);
    out.set_item("epsilon_j", m.epsilon_j)?;
    out.set_item("theta_j", m.theta_j)?;
    out.set_item("fidelity", m.fidelity)?;
    out.set_item("fidelity_approx", m.fidelity_approx)?;
    out.set_item("notes", m.notes)?;
    Ok(out)
}

fn model(text: &str, n_qubits: usize) -> PyResult<ModelSpec> {
    ok(ModelSpec::parse(text, n_qubits))
}

/// Exact parameter count; arbitrary precision.
#[pyfunction]
fn parameter_count(model_text: &str, n_qubits: usize) -> PyResult<num_bigint::BigUint> {
    Ok(model_count(&model(model_text, n_qubits)?))
}

#[pyfunction]
fn sector_sizes(model_text: &str, n_qubits: usize) -> PyResult<HashMap<String, num_bigint::BigUint>> {
    let spec = model(model_text, n_qubits)?;
    Ok(sector_counts(&spec).into_iter().map(|(s, c)| (s.to_string(), c)).collect())
}

#[pyfunction]
fn labels_of(model_text: &str, n_qubits: usize) -> PyResult<Vec<String>> {
    let labels = ok(model_labels(&model(model_text, n_qubits)?))?;
    Ok(labels.iter().map(ToString::to_string).collect())
}

/// `(in_model, residual)` rate dicts.
#[pyfunction]
#[pyo3(signature = (rates, model_text, n_qubits = None))]
fn project<'py>(
    py: Python<'py>,
    rates: HashMap<String, f64>,
    model_text: &str,
    n_qubits: Option<usize>,
) -> PyResult<(Bound<'py, PyDict>, Bound<'py, PyDict>)> {
    let r = rates_from_dict(rates, n_qubits, Convention::Logarithm)?;
    let p = ok(project_rates(&r, &model(model_text, r.n_qubits())?))?;
    Ok((rates_to_dict(py, &p.in_model)?, rates_to_dict(py, &p.residual)?))
}

/// Reference channels; `param` is the angle, q, gamma, p or random scale.
#[pyfunction]
#[pyo3(signature = (kind, n_qubits = 1, param = 0.0, pauli = None, qubit = 0, seed = 0))]
fn make_channel(
    kind: &str,
    n_qubits: usize,
    param: f64,
    pauli: Option<&str>,
    qubit: usize,
    seed: u64,
) -> PyResult<PyProcess> {
    let pauli = || -> PyResult<PauliString> {
        let text = pauli.ok_or_else(|| PyValueError::new_err(format!("channel kind '{kind}' needs a pauli")))?;
        ok(text.parse())
    };
    let kind = match kind {
        "identity" => ChannelKind::Identity,
        "rotation" => ChannelKind::PauliRotation { pauli: pauli()?, angle: param },
        "depolarizing" => ChannelKind::Depolarizing { q: param },
        "dephasing" => ChannelKind::Dephasing { pauli: pauli()?, q: param },
        "amplitude-damping" => ChannelKind::AmplitudeDamping { gamma: param, qubit },
        "indivisible-xy" => ChannelKind::IndivisibleXy { p: param, qubit },
        "random" => ChannelKind::RandomSmall { seed, scale: param },
        other => return Err(PyValueError::new_err(format!("unknown channel kind '{other}'"))),
    };
    ok(build_channel(&ChannelSpec::new(n_qubits, kind)).map(PyProcess))
}

#[pyfunction]
#[pyo3(signature = (name, n_qubits = 1))]
fn ideal_target(name: &str, n_qubits: usize) -> PyResult<PyProcess> {
    ok(ideal(name, n_qubits).map(PyProcess))
}

#[pymodule]
#[pyo3(name = "errgen")]
fn errgen_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPauli>()?;
    m.add_class::<PyLabel>()?;
    m.add_class::<PyProcess>()?;
    m.add("NoRealLogarithmError", m.py().get_type::<NoRealLogarithmError>())?;
    m.add("NotTracePreservingError", m.py().get_type::<NotTracePreservingError>())?;
    m.add("InvalidModelError", m.py().get_type::<InvalidModelError>())?;
    m.add_function(wrap_pyfunction!(error_generator, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(decompose_gate, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(metrics, m)?)?;
    m.add_function(wrap_pyfunction!(parameter_count, m)?)?;
    m.add_function(wrap_pyfunction!(sector_sizes, m)?)?;
    m.add_function(wrap_pyfunction!(labels_of, m)?)?;
    m.add_function(wrap_pyfunction!(project, m)?)?;
    m.add_function(wrap_pyfunction!(make_channel, m)?)?;
    m.add_function(wrap_pyfunction!(ideal_target, m)?)?;
    Ok(())
}
