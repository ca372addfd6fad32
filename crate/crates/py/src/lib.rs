//! Python bindings for `ferdisc-core`.
//!
//! States are immutable `State` objects; protocols cross the boundary as
//! their JSON text so they can be stored and reloaded unchanged.

use std::collections::HashMap;
use std::path::PathBuf;

use ferdisc_core::discrim::{optimality_report, CriticalPrior};
use ferdisc_core::statefile::{read_state_file, write_states};
use ferdisc_core::sweep::PerturbationContext;
use ferdisc_core::{
    attach_ancilla, build_protocol, classify_perfect, delta, helstrom_error, locc_error, make_state, sector_projectors,
    simulate, DiscriminationInstance, Error, FockVector, LoccProtocol, ModePartition, ProtocolKind, DEFAULT_TOL,
};
use num_complex::Complex64;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(_) | Error::File { .. } => PyOSError::new_err(e.to_string()),
        Error::NonConvergence(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for ferdisc_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// A normalized-or-not state vector on a bipartite mode partition.
#[pyclass(name = "State", module = "ferdisc", frozen, from_py_object)]
#[derive(Clone)]
struct PyState {
    inner: FockVector,
}

#[pymethods]
impl PyState {
    /// `terms` maps bitstrings (character j = mode j, Alice first) to amplitudes.
    #[new]
    #[pyo3(signature = (n_alice, n_bob, terms, normalize = true))]
    fn new(n_alice: usize, n_bob: usize, terms: HashMap<String, Complex64>, normalize: bool) -> PyResult<Self> {
        let p = ModePartition::new(n_alice, n_bob).py()?;
        let mut pairs: Vec<(String, Complex64)> = terms.into_iter().collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let refs: Vec<(&str, Complex64)> = pairs.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        Ok(Self { inner: make_state(p, &refs, normalize).py()? })
    }

    #[getter]
    fn n_alice(&self) -> usize {
        self.inner.partition().n_alice()
    }

    #[getter]
    fn n_bob(&self) -> usize {
        self.inner.partition().n_bob()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.partition().dim()
    }

    /// `"even"` or `"odd"` total occupation parity.
    #[getter]
    fn parity(&self) -> &'static str {
        self.inner.sector().as_str()
    }

    #[getter]
    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    /// Dense amplitudes; index bit i is the occupation of mode i.
    #[getter]
    fn amplitudes(&self) -> Vec<Complex64> {
        self.inner.amplitudes().iter().copied().collect()
    }

    /// Non-zero amplitudes as `(bitstring, amplitude)` pairs in index order.
    fn terms(&self) -> Vec<(String, Complex64)> {
        let p = self.inner.partition();
        self.inner.terms().into_iter().map(|(i, a)| (p.bitstring(i), a)).collect()
    }

    /// `<self|other>`
    fn inner(&self, other: &PyState) -> Complex64 {
        self.inner.inner(&other.inner)
    }

    /// This state with the ancilla `a|00> + b|11>` appended, one mode per party.
    fn with_ancilla(&self, a: Complex64, b: Complex64) -> PyResult<PyState> {
        Ok(PyState { inner: attach_ancilla(&self.inner, a, b).py()? })
    }

    fn __repr__(&self) -> String {
        let p = self.inner.partition();
        let body: Vec<String> = self
            .terms()
            .iter()
            .map(|(k, a)| format!("'{k}': ({}{:+}j)", a.re, a.im))
            .collect();
        format!("State({}, {}, {{{}}})", p.n_alice(), p.n_bob(), body.join(", "))
    }

    fn __eq__(&self, other: &PyState) -> bool {
        self.inner == other.inner
    }
}

fn instance(psi: &PyState, phi: &PyState, prior: f64) -> PyResult<DiscriminationInstance> {
    DiscriminationInstance::new(psi.inner.clone(), phi.inner.clone(), prior).py()
}

/// States of a state file as `(name, State)` pairs, rescaled to unit norm.
#[pyfunction]
fn read_states(path: PathBuf) -> PyResult<Vec<(Option<String>, PyState)>> {
    let file = read_state_file(&path).py()?;
    let states = file.fock_states(true).py()?;
    Ok(file.states.into_iter().zip(states).map(|(e, s)| (e.name, PyState { inner: s })).collect())
}

/// Text of a state file holding the given `(name, State)` pairs.
#[pyfunction]
fn format_states(states: Vec<(Option<String>, PyState)>) -> PyResult<String> {
    let refs: Vec<(Option<&str>, &FockVector)> = states.iter().map(|(n, s)| (n.as_deref(), &s.inner)).collect();
    write_states(&refs).py()
}

/// Perfect-discrimination verdict for two orthogonal states.
#[pyfunction]
#[pyo3(signature = (psi, phi, tol = DEFAULT_TOL))]
fn check<'py>(py: Python<'py>, psi: &PyState, phi: &PyState, tol: f64) -> PyResult<Bound<'py, PyDict>> {
    let v = classify_perfect(&psi.inner, &phi.inner, tol).py()?;
    let d = PyDict::new(py);
    d.set_item("perfect", v.is_perfect())?;
    d.set_item("case", v.case.as_str())?;
    d.set_item("sigma_e", v.sigma_e)?;
    d.set_item("sigma_o", v.sigma_o)?;
    Ok(d)
}

/// Helstrom and optimal LOCC error probabilities at prior `prior` for `psi`.
#[pyfunction]
#[pyo3(signature = (psi, phi, prior = 0.5, tol = DEFAULT_TOL))]
fn errors<'py>(py: Python<'py>, psi: &PyState, phi: &PyState, prior: f64, tol: f64) -> PyResult<Bound<'py, PyDict>> {
    let inst = instance(psi, phi, prior)?.even_form().py()?;
    let dl = delta(&inst);
    let sp = sector_projectors(inst.partition());
    let (hel, locc) = (helstrom_error(&dl), locc_error(&dl, &sp).py()?);
    let d = PyDict::new(py);
    d.set_item("helstrom", hel)?;
    d.set_item("locc", locc)?;
    d.set_item("gap", locc - hel)?;
    let report = optimality_report(&dl, &sp, tol);
    d.set_item("locc_optimal", report.locc_optimal())?;
    d.set_item("commutes_with_pe", report.commutes)?;
    Ok(d)
}

/// Prior at which unassisted LOCC is optimal: `("unique", p)`,
/// `("all", None)` or `("none", None)`.
#[pyfunction]
#[pyo3(signature = (psi, phi, tol = DEFAULT_TOL))]
fn critical_prior(psi: &PyState, phi: &PyState, tol: f64) -> PyResult<(&'static str, Option<f64>)> {
    Ok(match ferdisc_core::critical_prior(&psi.inner, &phi.inner, tol).py()? {
        CriticalPrior::Unique(p) => ("unique", Some(p)),
        CriticalPrior::AllPriors => ("all", None),
        CriticalPrior::None => ("none", None),
    })
}

/// The one-parameter family on one mode per party: `(psi, phi, p0)`.
#[pyfunction]
fn appendix_states(xi: f64) -> PyResult<(PyState, PyState, f64)> {
    let (psi, phi, p0) = ferdisc_core::sweep::appendix_states(xi).py()?;
    Ok((PyState { inner: psi }, PyState { inner: phi }, p0))
}

/// Error excess of the fixed-prior measurement over re-optimized LOCC after
/// shifting the family's prior by `epsilon`.
#[pyfunction]
fn delta_perr(xi: f64, epsilon: f64) -> PyResult<f64> {
    PerturbationContext::for_xi(xi).py()?.delta_perr(epsilon).py()
}

/// LOCC minus Helstrom error of the family at the shifted prior.
#[pyfunction]
fn delta_perr_prime(xi: f64, epsilon: f64) -> PyResult<f64> {
    PerturbationContext::for_xi(xi).py()?.delta_perr_prime(epsilon).py()
}

/// `(k, g, kappa)` of the first-order bounds at `epsilon`.
#[pyfunction]
fn bound_constants(xi: f64, epsilon: f64) -> PyResult<(f64, f64, f64)> {
    let b = PerturbationContext::for_xi(xi).py()?.bound_constants(epsilon).py()?;
    Ok((b.k, b.g, b.kappa))
}

/// JSON text of a two-round protocol; `kind` is `auto`, `perfect` or `optimal`.
#[pyfunction]
#[pyo3(signature = (psi, phi, prior = 0.5, kind = "auto", tol = DEFAULT_TOL))]
fn build_protocol_json(psi: &PyState, phi: &PyState, prior: f64, kind: &str, tol: f64) -> PyResult<String> {
    let kind = match kind {
        "auto" => ProtocolKind::Auto,
        "perfect" => ProtocolKind::Perfect,
        "optimal" => ProtocolKind::Optimal,
        other => return Err(PyValueError::new_err(format!("unknown protocol kind {other:?}"))),
    };
    build_protocol(&psi.inner, &phi.inner, prior, kind, tol).py()?.to_json().py()
}

/// Exact error probability of a protocol given as JSON.
#[pyfunction]
#[pyo3(signature = (protocol, psi, phi, prior = 0.5))]
fn protocol_error(protocol: &str, psi: &PyState, phi: &PyState, prior: f64) -> PyResult<f64> {
    let proto = LoccProtocol::from_json(protocol).py()?;
    Ok(proto.analytic_error(&instance(psi, phi, prior)?))
}

/// Monte Carlo run of a protocol given as JSON; deterministic for a seed.
#[pyfunction]
#[pyo3(signature = (protocol, psi, phi, prior = 0.5, shots = 10_000, seed = 24_301))]
fn simulate_protocol<'py>(
    py: Python<'py>,
    protocol: &str,
    psi: &PyState,
    phi: &PyState,
    prior: f64,
    shots: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let proto = LoccProtocol::from_json(protocol).py()?;
    let inst = instance(psi, phi, prior)?;
    let rep = py.detach(|| simulate(&proto, &inst, shots, seed)).py()?;
    let d = PyDict::new(py);
    d.set_item("shots", rep.shots)?;
    d.set_item("errors", rep.errors)?;
    d.set_item("empirical_error", rep.empirical_error)?;
    d.set_item("std_err", rep.std_err)?;
    d.set_item("seed", rep.seed)?;
    Ok(d)
}

/// Two-state discrimination for bipartite Fermionic systems.
#[pymodule]
fn ferdisc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyState>()?;
    m.add("DEFAULT_TOL", DEFAULT_TOL)?;
    for f in [
        wrap_pyfunction!(read_states, m)?,
        wrap_pyfunction!(format_states, m)?,
        wrap_pyfunction!(check, m)?,
        wrap_pyfunction!(errors, m)?,
        wrap_pyfunction!(critical_prior, m)?,
        wrap_pyfunction!(appendix_states, m)?,
        wrap_pyfunction!(delta_perr, m)?,
        wrap_pyfunction!(delta_perr_prime, m)?,
        wrap_pyfunction!(bound_constants, m)?,
        wrap_pyfunction!(build_protocol_json, m)?,
        wrap_pyfunction!(protocol_error, m)?,
        wrap_pyfunction!(simulate_protocol, m)?,
    ] {
        m.add_function(f)?;
    }
    Ok(())
}
