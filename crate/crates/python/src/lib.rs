//! Python bindings: scenarios, simulation, evaluation, and bound checks.

use larsim_core::algorithms::{StrategySpec, SubSolver};
use larsim_core::harness::{self, EvalOptions, SuiteOptions};
use larsim_core::instance::{
    gen_adversarial, gen_random, perturb_prediction, Adversarial, ErrorReport, Noise, Problem,
    RandomParams,
};
use larsim_core::metric::SpaceKind;
use larsim_core::offline::offline_opt;
use larsim_core::Error;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(m) => PyOSError::new_err(m),
        Error::Capacity(_) | Error::Divergence(_) | Error::InternalConsistency(_) | Error::Protocol(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        other => PyValueError::new_err(other.to_string()),
    }
}

/// `(id, release, pickup, delivery)` as seen from Python.
type RequestTuple = (usize, f64, Vec<f64>, Option<Vec<f64>>);

/// An instance with its optional prediction.
#[pyclass(frozen, module = "larsim")]
struct Scenario {
    inner: larsim_core::instance::Scenario,
}

#[pymethods]
impl Scenario {
    /// Parses the canonical JSON scenario format.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = larsim_core::instance::Scenario::from_json(text).map_err(py_err)?;
        Ok(Scenario { inner })
    }

    /// Uniform random instance; a paired prediction is attached when any
    /// noise level is given.
    #[staticmethod]
    #[pyo3(signature = (problem="tsp", space="line", n=5, seed=0, noise_time=None, noise_pos=None))]
    fn random(
        problem: &str,
        space: &str,
        n: usize,
        seed: u64,
        noise_time: Option<f64>,
        noise_pos: Option<f64>,
    ) -> PyResult<Self> {
        let params = RandomParams {
            problem: Problem::parse(problem).map_err(py_err)?,
            space: SpaceKind::parse(space).map_err(py_err)?,
            n,
            ..Default::default()
        };
        let inst = gen_random(&params, seed);
        let prediction = if noise_time.is_some() || noise_pos.is_some() {
            let noise = Noise { time: noise_time.unwrap_or(0.0), pos: noise_pos.unwrap_or(0.0) };
            Some(perturb_prediction(&inst, noise, seed.wrapping_add(1)).map_err(py_err)?)
        } else {
            None
        };
        let inner = larsim_core::instance::Scenario::new(inst, prediction).map_err(py_err)?;
        Ok(Scenario { inner })
    }

    /// Hand-built family: lb1, lb1-perfect, lb2, lb2-perfect, trust-blowup, late-tn.
    #[staticmethod]
    #[pyo3(signature = (kind, param=0.5))]
    fn adversarial(kind: &str, param: f64) -> PyResult<Self> {
        let (inst, pred) = gen_adversarial(Adversarial::parse(kind, param).map_err(py_err)?).map_err(py_err)?;
        let inner = larsim_core::instance::Scenario::new(inst, Some(pred)).map_err(py_err)?;
        Ok(Scenario { inner })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn problem(&self) -> &'static str {
        self.inner.instance.problem.as_str()
    }

    #[getter]
    fn prediction_model(&self) -> Option<&'static str> {
        self.inner.prediction.as_ref().map(|p| p.model().as_str())
    }

    /// Requests as `(id, release, pickup, delivery)` tuples.
    #[getter]
    fn requests(&self) -> Vec<RequestTuple> {
        self.inner
            .instance
            .requests
            .iter()
            .map(|r| (r.id, r.release, r.position.coords().to_vec(), r.delivery.map(|b| b.coords().to_vec())))
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.instance.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario({} requests, {}, {})",
            self.inner.instance.len(),
            self.inner.instance.problem.as_str(),
            self.inner.instance.space.kind.as_str()
        )
    }
}

/// Offline optimum completion time from the exact solver.
#[pyfunction]
fn optimum(scenario: &Scenario) -> PyResult<f64> {
    offline_opt(&scenario.inner.instance).map_err(py_err)
}

/// Runs a strategy and returns its evaluation record as a dict, with the
/// event trace as JSON lines under `trace`.
#[pyfunction]
#[pyo3(signature = (scenario, strategy, subsolver="exact"))]
fn evaluate<'py>(py: Python<'py>, scenario: &Scenario, strategy: &str, subsolver: &str) -> PyResult<Bound<'py, PyDict>> {
    let spec = StrategySpec::parse(strategy).map_err(py_err)?;
    let solver = SubSolver::parse(subsolver).map_err(py_err)?;
    let s = &scenario.inner;
    let (rec, trace) = py
        .detach(|| {
            harness::evaluate_traced("scenario", &s.instance, s.prediction.as_ref(), &spec, solver, EvalOptions::default())
        })
        .map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("strategy", rec.strategy)?;
    d.set_item("lambda", rec.lambda)?;
    d.set_item("subsolver", rec.subsolver.as_str())?;
    d.set_item("eps_time", rec.errors.eps_time)?;
    d.set_item("eps_pos", rec.errors.eps_pos)?;
    d.set_item("eps_last", rec.errors.eps_last)?;
    d.set_item("z_alg", rec.z_alg)?;
    d.set_item("z_opt", rec.z_opt)?;
    d.set_item("ratio", rec.ratio)?;
    d.set_item("bound", rec.bound)?;
    d.set_item("bound_ok", rec.bound_ok)?;
    d.set_item("trace", trace.to_jsonl())?;
    Ok(d)
}

/// Prediction errors of the scenario as `(eps_time, eps_pos, eps_last)`.
#[pyfunction]
fn errors(scenario: &Scenario) -> PyResult<(Option<f64>, Option<f64>, Option<f64>)> {
    let s = &scenario.inner;
    let e = ErrorReport::measure(s.prediction.as_ref(), &s.instance).map_err(py_err)?;
    Ok((e.eps_time, e.eps_pos, e.eps_last))
}

/// Absolute cost cap of a strategy, or None when it has no proven bound.
#[pyfunction]
#[pyo3(signature = (strategy, z_opt, subsolver="exact", eps_time=None, eps_pos=None, eps_last=None, perfect=false))]
fn bound_for(
    strategy: &str,
    z_opt: f64,
    subsolver: &str,
    eps_time: Option<f64>,
    eps_pos: Option<f64>,
    eps_last: Option<f64>,
    perfect: bool,
) -> PyResult<Option<f64>> {
    let spec = StrategySpec::parse(strategy).map_err(py_err)?;
    let solver = SubSolver::parse(subsolver).map_err(py_err)?;
    Ok(harness::bound_for(&spec, solver, &ErrorReport { eps_time, eps_pos, eps_last }, z_opt, perfect))
}

/// Runs acceptance criterion `number` and returns `(passed, status line)`.
#[pyfunction]
fn verify_criterion(py: Python<'_>, number: usize) -> (bool, String) {
    let o = py.detach(|| harness::verify_criterion(number, SuiteOptions::default()));
    (o.passed, o.line())
}

/// Strategy names accepted by `evaluate`.
#[pyfunction]
fn strategies() -> Vec<&'static str> {
    vec![
        "pah", "pah-delayed:<t0>", "redesign", "follow-pred", "wait-then-serve", "lar-nid:<lambda>", "lar-trust",
        "lar-id", "lar-last", "darp-redesign", "ladar-trust", "ladar-nid:<lambda>", "ladar-id", "ladar-last",
    ]
}

#[pymodule]
fn larsim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Scenario>()?;
    m.add_function(wrap_pyfunction!(optimum, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(errors, m)?)?;
    m.add_function(wrap_pyfunction!(bound_for, m)?)?;
    m.add_function(wrap_pyfunction!(verify_criterion, m)?)?;
    m.add_function(wrap_pyfunction!(strategies, m)?)?;
    Ok(())
}
