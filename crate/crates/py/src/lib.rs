//! Python bindings for `frac_obstacle`.

use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use frac_obstacle::analysis;
use frac_obstacle::config::{parse_config, Horizon, ProblemData};
use frac_obstacle::experiment::{run_sweep as sweep, ExecOptions, DEFAULT_STEP_BUDGET};
use frac_obstacle::kernels;
use frac_obstacle::problem::{make_grid, ProblemSpec, SchemeKind, TimeGrid};
use frac_obstacle::schemes::{run_with, RunOptions};

fn py_err(e: frac_obstacle::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn scheme(name: &str) -> PyResult<SchemeKind> {
    name.parse().map_err(py_err)
}

/// A sampled, validated problem on interior nodes.
#[pyclass(name = "ProblemSpec", module = "frac_obstacle_py", frozen)]
struct PySpec {
    inner: ProblemSpec,
}

#[pymethods]
impl PySpec {
    /// Build from interior nodal values of `u0` and `psi`.
    #[new]
    #[pyo3(signature = (alpha, a, b, n_intervals, tau, m_steps, u0, psi, psi_boundary=(0.0, 0.0), scheme="S3", tol=1e-4))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        alpha: f64,
        a: f64,
        b: f64,
        n_intervals: usize,
        tau: f64,
        m_steps: usize,
        u0: Vec<f64>,
        psi: Vec<f64>,
        psi_boundary: (f64, f64),
        scheme: &str,
        tol: f64,
    ) -> PyResult<Self> {
        let grid = make_grid(a, b, n_intervals).map_err(py_err)?;
        let time = TimeGrid::new(tau, m_steps).map_err(py_err)?;
        let inner = ProblemSpec::from_nodal(
            alpha,
            grid,
            time,
            u0,
            psi,
            psi_boundary,
            self::scheme(scheme)?,
            tol,
        )
        .map_err(py_err)?;
        Ok(Self { inner })
    }

    /// One of the built-in examples (`"example1"`, `"example2"`) with `tau`
    /// derived from `gamma`. Give either `steps` or the final time `t_final`.
    #[staticmethod]
    #[pyo3(signature = (name, alpha, n_intervals, gamma, steps=None, t_final=None, scheme="S3", tol=1e-4))]
    #[allow(clippy::too_many_arguments)]
    fn example(
        name: &str,
        alpha: f64,
        n_intervals: usize,
        gamma: f64,
        steps: Option<usize>,
        t_final: Option<f64>,
        scheme: &str,
        tol: f64,
    ) -> PyResult<Self> {
        let data = match name {
            "example1" => ProblemData::example1(),
            "example2" => ProblemData::example2(),
            other => return Err(PyValueError::new_err(format!("unknown example `{other}`"))),
        };
        let horizon = match (steps, t_final) {
            (Some(m), None) => Horizon::Steps(m),
            (None, Some(t)) => Horizon::Final(t),
            (None, None) => Horizon::Steps(DEFAULT_STEP_BUDGET),
            _ => return Err(PyValueError::new_err("give steps or t_final, not both")),
        };
        let inner = data
            .spec_for_ratio(alpha, n_intervals, gamma, horizon, self::scheme(scheme)?, tol)
            .map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.grid().h()
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.inner.time().tau()
    }

    #[getter]
    fn m_steps(&self) -> usize {
        self.inner.time().m_steps()
    }

    #[getter]
    fn gamma_alpha(&self) -> f64 {
        self.inner.gamma_alpha()
    }

    #[getter]
    fn scheme(&self) -> &'static str {
        self.inner.scheme().as_str()
    }

    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.inner.grid().nodes().to_vec()
    }

    #[getter]
    fn u0(&self) -> Vec<f64> {
        self.inner.u0().to_vec()
    }

    #[getter]
    fn psi(&self) -> Vec<f64> {
        self.inner.psi().to_vec()
    }

    fn with_scheme(&self, scheme: &str) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.with_scheme(self::scheme(scheme)?),
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "ProblemSpec(alpha={}, n_nodes={}, tau={:e}, m_steps={}, scheme={})",
            self.inner.alpha(),
            self.inner.grid().len(),
            self.inner.time().tau(),
            self.inner.time().m_steps(),
            self.inner.scheme()
        )
    }
}

#[pyclass(name = "RunReport", module = "frac_obstacle_py", frozen, get_all)]
struct PyReport {
    scheme: &'static str,
    fc_time: Option<f64>,
    stop_time: Option<f64>,
    n_iterations: usize,
    avg_picard: Option<f64>,
    n_linear_systems: usize,
    converged: bool,
    budget_exhausted: bool,
    final_solution: Vec<f64>,
    /// Every step `u^0..u^m`, filled only when requested.
    history: Option<Vec<Vec<f64>>>,
}

#[pymethods]
impl PyReport {
    fn __repr__(&self) -> String {
        format!(
            "RunReport(scheme={}, n_iterations={}, converged={}, stop_time={:?}, fc_time={:?})",
            self.scheme, self.n_iterations, self.converged, self.stop_time, self.fc_time
        )
    }
}

/// Time-step `spec` until the stopping test fires or the horizon is reached.
#[pyfunction]
#[pyo3(signature = (spec, truncate_memory=true, stop_on_tolerance=true, step_budget=None, keep_history=false))]
fn run(
    py: Python<'_>,
    spec: &PySpec,
    truncate_memory: bool,
    stop_on_tolerance: bool,
    step_budget: Option<usize>,
    keep_history: bool,
) -> PyResult<PyReport> {
    let options = RunOptions {
        truncate_memory,
        step_budget,
        stop_on_tolerance,
        ..RunOptions::default()
    };
    let inner = &spec.inner;
    let (state, r) = py.detach(|| run_with(inner, &options)).map_err(py_err)?;
    Ok(PyReport {
        scheme: r.scheme.as_str(),
        fc_time: r.fc_time,
        stop_time: r.stop_time,
        n_iterations: r.n_iterations,
        avg_picard: r.avg_picard,
        n_linear_systems: r.n_linear_systems,
        converged: r.converged,
        budget_exhausted: r.budget_exhausted,
        final_solution: r.final_solution,
        history: keep_history.then(|| state.history().to_vec()),
    })
}

/// L1 weights `C_{m,0..m-1}` and the scale `Gamma(2 - alpha)`.
#[pyfunction]
fn l1_weights(alpha: f64, m: usize) -> PyResult<(Vec<f64>, f64)> {
    let w = kernels::l1_weights(alpha, m).map_err(py_err)?;
    Ok((w.weights, w.g))
}

/// Grünwald–Letnikov weights `c_0..c_count`.
#[pyfunction]
fn cq_weights(alpha: f64, count: usize) -> PyResult<Vec<f64>> {
    Ok(kernels::cq_weights(alpha, count).map_err(py_err)?.weights)
}

/// Stationary reference `(u_bar, contact, contact_extremum)`.
#[pyfunction]
#[pyo3(signature = (spec, ref_tol=1e-10))]
fn stationary_solve(
    py: Python<'_>,
    spec: &PySpec,
    ref_tol: f64,
) -> PyResult<(Vec<f64>, Vec<bool>, Option<f64>)> {
    let inner = &spec.inner;
    let r = py
        .detach(|| analysis::stationary_solve(inner, ref_tol))
        .map_err(py_err)?;
    Ok((r.u_bar, r.contact, r.contact_extremum))
}

#[pyfunction]
fn l1_error(u: Vec<f64>, u_bar: Vec<f64>, h: f64) -> PyResult<f64> {
    analysis::l1_error(&u, &u_bar, h).map_err(py_err)
}

/// `J(t) = t^{-alpha} / (C Gamma(1 - alpha))`.
#[pyfunction]
fn j_decay(t: f64, alpha: f64, c_constant: f64) -> PyResult<f64> {
    analysis::j_decay(t, alpha, c_constant).map_err(py_err)
}

/// Fit `C` to `(t, l1_error)` samples.
#[pyfunction]
fn fit_decay_constant(samples: Vec<(f64, f64)>, alpha: f64) -> PyResult<f64> {
    analysis::fit_decay_constant(&samples, alpha).map_err(py_err)
}

/// Run every combination of a config document and write the CSV outputs
/// under `out_dir`. Returns the process exit code.
#[pyfunction]
#[pyo3(signature = (config, out_dir, workers=None, budget=DEFAULT_STEP_BUDGET))]
fn run_sweep(
    py: Python<'_>,
    config: &str,
    out_dir: PathBuf,
    workers: Option<usize>,
    budget: usize,
) -> PyResult<i32> {
    let config = parse_config(config).map_err(py_err)?;
    let exec = ExecOptions {
        workers,
        budget,
        ..ExecOptions::new(out_dir)
    };
    py.detach(|| sweep(&config, &exec))
        .map(|r| r.exit_code)
        .map_err(py_err)
}

#[pymodule]
fn frac_obstacle_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpec>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(l1_weights, m)?)?;
    m.add_function(wrap_pyfunction!(cq_weights, m)?)?;
    m.add_function(wrap_pyfunction!(stationary_solve, m)?)?;
    m.add_function(wrap_pyfunction!(l1_error, m)?)?;
    m.add_function(wrap_pyfunction!(j_decay, m)?)?;
    m.add_function(wrap_pyfunction!(fit_decay_constant, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    Ok(())
}
