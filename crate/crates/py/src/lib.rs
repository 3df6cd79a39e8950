//! Python bindings for `poisson_nav`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use poisson_nav::harness::validate::{run_validate as run_checks, Fixtures};
use poisson_nav::nav::{self, Horizon, Sampler};
use poisson_nav::ratefn;
use poisson_nav::renewal::{self, EstimateWithCI, TailCurve};
use poisson_nav::NavError;

fn to_py(e: NavError) -> PyErr {
    match e {
        NavError::InvalidParameter(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn sampler(name: &str) -> PyResult<Sampler> {
    name.parse().map_err(to_py)
}

#[pyclass(name = "ModelParams", module = "poisson_nav_py", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyModelParams {
    inner: nav::ModelParams,
}

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (lambda_, theta))]
    fn new(lambda_: f64, theta: f64) -> PyResult<Self> {
        Ok(Self {
            inner: nav::ModelParams::new(lambda_, theta).map_err(to_py)?,
        })
    }

    /// `θ = π·p/q`.
    #[staticmethod]
    #[pyo3(signature = (lambda_, p, q))]
    fn from_theta_frac(lambda_: f64, p: u32, q: u32) -> PyResult<Self> {
        Ok(Self {
            inner: nav::ModelParams::with_theta_frac(lambda_, p, q).map_err(to_py)?,
        })
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.inner.lambda
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta
    }

    fn narrow_angle(&self) -> f64 {
        self.inner.narrow_angle()
    }

    fn is_wide(&self) -> bool {
        self.inner.is_wide()
    }

    fn mean_step_x(&self) -> f64 {
        self.inner.mean_step_x()
    }

    fn __repr__(&self) -> String {
        format!("ModelParams(lambda_={}, theta={})", self.inner.lambda, self.inner.theta)
    }
}

#[pyclass(name = "Navigator", module = "poisson_nav_py")]
struct PyNavigator {
    inner: nav::Navigator,
}

#[pymethods]
impl PyNavigator {
    #[new]
    #[pyo3(signature = (params, seed, path_id = 0, sampler = "points"))]
    fn new(params: &PyModelParams, seed: u64, path_id: u64, sampler: &str) -> PyResult<Self> {
        Ok(Self {
            inner: nav::Navigator::new(params.inner, seed, path_id, self::sampler(sampler)?),
        })
    }

    /// One step as `(x, y, r, phi, renewal)` with `(x, y)` the progress.
    fn step(&mut self) -> PyResult<(f64, f64, f64, f64, bool)> {
        let s = self.inner.step().map_err(to_py)?;
        Ok((s.progress.x, s.progress.y, s.polar.r, s.polar.phi, s.history_empty_after))
    }

    /// Step with the points sampler, returning `(step_r, under_r, over_r)`.
    fn step_coupled(&mut self) -> PyResult<(f64, f64, f64)> {
        let (s, c) = self.inner.step_coupled().map_err(to_py)?;
        Ok((s.polar.r, c.under.r, c.over.r))
    }

    #[getter]
    fn position(&self) -> (f64, f64) {
        let p = self.inner.position();
        (p.x, p.y)
    }

    #[getter]
    fn steps_taken(&self) -> usize {
        self.inner.steps_taken()
    }

    /// Number of terms in the current history set.
    #[getter]
    fn history_terms(&self) -> usize {
        self.inner.history().len()
    }

    fn narrow_cone_is_free(&self) -> bool {
        nav::narrow_cone_is_free(self.inner.history(), self.inner.params())
    }
}

fn estimate_dict<'py>(py: Python<'py>, e: &EstimateWithCI) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("value", e.value)?;
    d.set_item("stderr", e.stderr)?;
    d.set_item("ci_low", e.ci_low)?;
    d.set_item("ci_high", e.ci_high)?;
    d.set_item("n", e.n)?;
    d.set_item("seed", e.seed)?;
    Ok(d)
}

fn tail_dict<'py>(py: Python<'py>, t: &TailCurve) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("levels", t.levels.clone())?;
    d.set_item("survival", t.survival.clone())?;
    d.set_item("ci_low", t.ci_low.clone())?;
    d.set_item("ci_high", t.ci_high.clone())?;
    d.set_item("hits", t.hits.clone())?;
    d.set_item("fitted_rate", t.fitted_rate)?;
    d.set_item("fit_r2", t.fit_r2)?;
    d.set_item("n_samples", t.n_samples)?;
    d.set_item("censored", t.censored)?;
    Ok(d)
}

fn rate_dict<'py>(py: Python<'py>, r: &ratefn::RateValue) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("value", r.value)?;
    d.set_item("infinite", r.infinite)?;
    d.set_item("witness", r.witness.clone())?;
    d.set_item("converged", r.converged)?;
    Ok(d)
}

/// Simulate one path for `steps` steps, or until `x ≥ t` when `t` is given.
/// Returns `{"waypoints": [(x, y), …], "renewals": [n, …]}`.
#[pyfunction]
#[pyo3(signature = (params, seed, path_id = 0, steps = 100, t = None, sampler = "points"))]
fn simulate_path<'py>(
    py: Python<'py>,
    params: &PyModelParams,
    seed: u64,
    path_id: u64,
    steps: usize,
    t: Option<f64>,
    sampler: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let horizon = t.map_or(Horizon::Steps(steps), Horizon::Time);
    let s = self::sampler(sampler)?;
    let p = params.inner;
    let path = py
        .detach(|| nav::simulate_path(p, horizon, seed, path_id, s))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    let w: Vec<(f64, f64)> = path.waypoints().iter().map(|v| (v.x, v.y)).collect();
    d.set_item("waypoints", w)?;
    d.set_item("renewals", path.renewal_indices.clone())?;
    Ok(d)
}

/// `Y_t` of path `(seed, path_id)`.
#[pyfunction]
#[pyo3(signature = (params, t, seed, path_id = 0, sampler = "points"))]
fn displacement_at(py: Python<'_>, params: &PyModelParams, t: f64, seed: u64, path_id: u64, sampler: &str) -> PyResult<f64> {
    let s = self::sampler(sampler)?;
    let p = params.inner;
    py.detach(|| nav::displacement_at(p, t, seed, path_id, s)).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (params, segments, seed, sampler = "points"))]
fn estimate_rho<'py>(py: Python<'py>, params: &PyModelParams, segments: usize, seed: u64, sampler: &str) -> PyResult<Bound<'py, PyDict>> {
    let s = self::sampler(sampler)?;
    let p = params.inner;
    let e = py.detach(|| renewal::estimate_rho(p, segments, seed, s)).map_err(to_py)?;
    estimate_dict(py, &e)
}

#[pyfunction]
#[pyo3(signature = (params, segments, seed, sampler = "points"))]
fn estimate_kappa<'py>(py: Python<'py>, params: &PyModelParams, segments: usize, seed: u64, sampler: &str) -> PyResult<Bound<'py, PyDict>> {
    let s = self::sampler(sampler)?;
    let p = params.inner;
    let e = py.detach(|| renewal::estimate_kappa(p, segments, seed, s)).map_err(to_py)?;
    estimate_dict(py, &e)
}

#[pyfunction]
#[pyo3(signature = (params, paths, seed, sampler = "points"))]
fn tau_tail<'py>(py: Python<'py>, params: &PyModelParams, paths: usize, seed: u64, sampler: &str) -> PyResult<Bound<'py, PyDict>> {
    let s = self::sampler(sampler)?;
    let p = params.inner;
    let t = py.detach(|| renewal::tau_tail(p, paths, seed, s)).map_err(to_py)?;
    tail_dict(py, &t)
}

#[pyfunction]
fn rho_closed_form(params: &PyModelParams) -> PyResult<f64> {
    ratefn::rho_closed_form(&params.inner).map_err(to_py)
}

#[pyfunction]
fn mdp_rate(x: f64, rho: f64) -> f64 {
    ratefn::mdp_rate(x, rho)
}

#[pyfunction]
fn cgf_step(gamma: (f64, f64), params: &PyModelParams) -> f64 {
    ratefn::cgf_step([gamma.0, gamma.1], &params.inner)
}

/// Legendre transform of the step CGF at `u`.
#[pyfunction]
fn legendre<'py>(py: Python<'py>, u: (f64, f64), params: &PyModelParams) -> PyResult<Bound<'py, PyDict>> {
    let c = ratefn::StepCgf::new(params.inner);
    rate_dict(py, &ratefn::legendre([u.0, u.1], &c))
}

#[pyfunction]
fn ldp_rate<'py>(py: Python<'py>, x: f64, params: &PyModelParams) -> PyResult<Bound<'py, PyDict>> {
    let p = params.inner;
    let r = py.detach(|| ratefn::ldp_rate(x, &p)).map_err(to_py)?;
    rate_dict(py, &r)
}

/// Dependent-case optimizer with Python callables `iprime(u, v)` and
/// `h(x, y)`. Exceptions raised by the callables are re-raised.
#[pyfunction]
fn dependent_ldp_rate<'py>(py: Python<'py>, a: f64, iprime: Bound<'py, PyAny>, h: Bound<'py, PyAny>) -> PyResult<Bound<'py, PyDict>> {
    let err: std::cell::RefCell<Option<PyErr>> = std::cell::RefCell::new(None);
    let call = |f: &Bound<'py, PyAny>, x: f64, y: f64| -> f64 {
        if err.borrow().is_some() {
            return f64::INFINITY;
        }
        match f.call1((x, y)).and_then(|v| v.extract::<f64>()) {
            Ok(v) => v,
            Err(e) => {
                *err.borrow_mut() = Some(e);
                f64::INFINITY
            }
        }
    };
    let r = ratefn::dependent_ldp_rate(a, |u, v| call(&iprime, u, v), |x, y| call(&h, x, y));
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    rate_dict(py, &r)
}

/// Run validation checks (all when `checks` is empty) at the bundled
/// fixtures. Returns a list of dicts and the overall status.
#[pyfunction]
#[pyo3(signature = (checks = Vec::new()))]
fn run_validate<'py>(py: Python<'py>, checks: Vec<String>) -> PyResult<(Vec<Bound<'py, PyDict>>, bool)> {
    let report = py
        .detach(|| run_checks(&checks, &Fixtures::bundled()))
        .map_err(to_py)?;
    let rows = report
        .checks
        .iter()
        .map(|c| {
            let d = PyDict::new(py);
            d.set_item("name", &c.name)?;
            d.set_item("status", c.status())?;
            d.set_item("statistic", c.statistic)?;
            d.set_item("threshold", c.threshold)?;
            d.set_item("seed", c.seed)?;
            d.set_item("detail", &c.detail)?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    Ok((rows, report.overall))
}

#[pymodule]
fn poisson_nav_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyNavigator>()?;
    m.add_function(wrap_pyfunction!(simulate_path, m)?)?;
    m.add_function(wrap_pyfunction!(displacement_at, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_rho, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_kappa, m)?)?;
    m.add_function(wrap_pyfunction!(tau_tail, m)?)?;
    m.add_function(wrap_pyfunction!(rho_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(mdp_rate, m)?)?;
    m.add_function(wrap_pyfunction!(cgf_step, m)?)?;
    m.add_function(wrap_pyfunction!(legendre, m)?)?;
    m.add_function(wrap_pyfunction!(ldp_rate, m)?)?;
    m.add_function(wrap_pyfunction!(dependent_ldp_rate, m)?)?;
    m.add_function(wrap_pyfunction!(run_validate, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
