//! Python bindings: prior moments, the Bayes factor solvers, the closed-form
//! oracle and whole experiment runs.

use mixbf::bfcore::{self, BfError};
use mixbf::experiment::{self, ExperimentConfig, ExperimentError, ExperimentKind};
use mixbf::oracle;
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;

fn bf_err(e: BfError) -> PyErr {
    match e {
        BfError::InvalidArgument(_) | BfError::DegenerateOccupancy { .. } => PyValueError::new_err(e.to_string()),
        _ => PyArithmeticError::new_err(e.to_string()),
    }
}

fn experiment_err(e: ExperimentError) -> PyErr {
    match e {
        ExperimentError::Config(_) => PyValueError::new_err(e.to_string()),
        ExperimentError::Numerical(_) => PyArithmeticError::new_err(e.to_string()),
        ExperimentError::Strict(_) => PyRuntimeError::new_err(e.to_string()),
        ExperimentError::Io(_) => PyOSError::new_err(e.to_string()),
    }
}

/// First and second moments of the mixture weights.
#[pyclass(name = "PriorMoments", module = "mixbf", frozen)]
#[derive(Clone)]
pub struct PyPriorMoments {
    inner: bfcore::PriorMoments,
}

#[pymethods]
impl PyPriorMoments {
    /// `first[i] = E[αᵢ]`, `second[i][j] = E[αᵢαⱼ]`.
    #[new]
    fn new(first: Vec<f64>, second: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = bfcore::PriorMoments::from_rows(first, &second).map_err(bf_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn dirichlet(p: Vec<f64>) -> PyResult<Self> {
        let inner = bfcore::dirichlet_moments(&p).map_err(bf_err)?;
        Ok(Self { inner })
    }

    /// Moments of a finite mixture of weight priors.
    #[staticmethod]
    fn mixture(weights: Vec<f64>, components: Vec<PyPriorMoments>) -> PyResult<Self> {
        let comps: Vec<_> = components.into_iter().map(|c| c.inner).collect();
        let inner = bfcore::mixture_moments(&weights, &comps).map_err(bf_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn first(&self) -> Vec<f64> {
        self.inner.first().to_vec()
    }

    #[getter]
    fn second(&self) -> Vec<Vec<f64>> {
        self.inner.second_matrix()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("PriorMoments(first={:?})", self.inner.first())
    }
}

/// All pairwise Bayes factors, `result[j][k] = Bⱼₖ`. `method` is
/// `"general"` or `"dirichlet"`.
#[pyfunction]
#[pyo3(signature = (moments, posterior_means, method = "general"))]
fn bayes_factors(moments: &PyPriorMoments, posterior_means: Vec<f64>, method: &str) -> PyResult<Vec<Vec<f64>>> {
    let post = bfcore::PosteriorMeans::new(posterior_means).map_err(bf_err)?;
    match method {
        "general" => bfcore::bf_matrix_general(&moments.inner, &post).map_err(bf_err),
        "dirichlet" => bfcore::bf_matrix_dirichlet(&moments.inner, &post).map_err(bf_err),
        other => Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    }
}

/// `B₁₂` for two models from `E[α₁ | x]`.
#[pyfunction]
fn two_model_bf(moments: &PyPriorMoments, e1: f64) -> PyResult<f64> {
    bfcore::two_model_bf(&moments.inner, e1).map_err(bf_err)
}

/// `(lower, upper)` range for `E[αᵢ | x]`; `lower` is `None` when unknown.
#[pyfunction]
fn posterior_mean_bounds(moments: &PyPriorMoments, i: usize) -> PyResult<(Option<f64>, f64)> {
    let b = bfcore::posterior_mean_bounds(&moments.inner, i).map_err(bf_err)?;
    Ok((b.lower, b.upper))
}

/// Posterior means of the weights implied by marginal likelihoods.
#[pyfunction]
fn posterior_means(moments: &PyPriorMoments, marginals: Vec<f64>) -> PyResult<Vec<f64>> {
    let post = bfcore::forward_posterior_means(&moments.inner, &marginals).map_err(bf_err)?;
    Ok(post.values().to_vec())
}

#[pyfunction]
fn occupancy_bf(occupancy: Vec<f64>, moments: &PyPriorMoments) -> PyResult<Vec<Vec<f64>>> {
    bfcore::occupancy_bf(&occupancy, &moments.inner).map_err(bf_err)
}

/// Closed-form Bayes factor of a Poisson process against a pure birth
/// process with `n` events in `[0, T]` summing to `S`.
#[pyfunction]
#[pyo3(signature = (n, horizon, sum, theta = 1.0))]
fn analytic_bf_events(n: u64, horizon: f64, sum: f64, theta: f64) -> PyResult<f64> {
    oracle::analytic_bf_ex3(n, horizon, sum, theta).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Default configuration of an experiment kind, as JSON text.
#[pyfunction]
fn default_config(kind: &str) -> PyResult<String> {
    let kind: ExperimentKind = kind.parse().map_err(experiment_err)?;
    Ok(ExperimentConfig::default_for(kind).to_json())
}

/// Runs the experiment described by a JSON configuration and returns the
/// summary as a dict.
#[pyfunction]
#[pyo3(signature = (config, threads = 1, strict = false))]
fn run_experiment<'py>(py: Python<'py>, config: &str, threads: usize, strict: bool) -> PyResult<Bound<'py, PyAny>> {
    let config = ExperimentConfig::from_json(config).map_err(experiment_err)?;
    config.validate().map_err(experiment_err)?;
    let report = py
        .allow_threads(|| experiment::run_experiment(&config, threads))
        .map_err(experiment_err)?;
    if strict {
        report.strict_check().map_err(experiment_err)?;
    }
    let text = serde_json::to_string(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pymodule]
#[pyo3(name = "mixbf")]
fn mixbf_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}

/// Adds the classes and functions to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPriorMoments>()?;
    m.add_function(wrap_pyfunction!(bayes_factors, m)?)?;
    m.add_function(wrap_pyfunction!(two_model_bf, m)?)?;
    m.add_function(wrap_pyfunction!(posterior_mean_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(posterior_means, m)?)?;
    m.add_function(wrap_pyfunction!(occupancy_bf, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_bf_events, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
