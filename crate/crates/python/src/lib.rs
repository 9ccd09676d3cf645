//! Python bindings: scenarios, trajectories, the two-particle report and
//! the expression language.
//!
//! Structured reports come back as plain dicts, decoded from the same JSON
//! the command-line tool prints.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use relmech_core::paradox::{self, ReportMode};
use relmech_core::runner::{self, RunError};
use relmech_core::scenario::Scenario as CoreScenario;
use relmech_core::{
    dynamics, expr, timeflow, Error as CoreError, MetricField, ScalarField, TimeFormChoice,
    Trajectory as CoreTrajectory,
};

create_exception!(relmech, NumericalError, PyException, "A numerical routine failed.");

fn numeric(e: CoreError) -> PyErr {
    match e {
        CoreError::Parse(_) | CoreError::DimensionMismatch { .. } | CoreError::Domain(_) => {
            PyValueError::new_err(e.to_string())
        }
        e => NumericalError::new_err(format!("{}: {e}", e.kind())),
    }
}

fn run_err(e: RunError) -> PyErr {
    match e {
        RunError::Numeric(e) => numeric(e),
        e => PyValueError::new_err(format!("{}: {e}", e.kind())),
    }
}

fn to_dict<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyDict>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?
        .call_method1("loads", (text,))?
        .cast_into::<PyDict>()
        .map_err(Into::into)
}

fn report_mode(mode: &str) -> PyResult<ReportMode> {
    match mode {
        "closed" => Ok(ReportMode::ClosedForm),
        "integrated" => Ok(ReportMode::Integrated),
        other => Err(PyValueError::new_err(format!(
            "mode must be 'closed' or 'integrated', got {other:?}"
        ))),
    }
}

/// A validated scenario document.
#[pyclass(module = "relmech", frozen)]
struct Scenario {
    inner: CoreScenario,
}

#[pymethods]
impl Scenario {
    #[new]
    fn new(json: &str) -> PyResult<Self> {
        let inner = CoreScenario::from_json(json).map_err(|e| PyValueError::new_err(format!("{}: {e}", e.kind())))?;
        inner
            .build()
            .map_err(|e| PyValueError::new_err(format!("{}: {e}", e.kind())))?;
        Ok(Scenario { inner })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn dim(&self) -> PyResult<usize> {
        self.inner
            .resolved_dim()
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// Integrates without writing files.
    fn integrate(&self) -> PyResult<Trajectory> {
        let out = runner::integrate_scenario(&self.inner).map_err(run_err)?;
        let metric = self
            .inner
            .build()
            .map_err(|e| PyValueError::new_err(e.to_string()))?
            .metric;
        Ok(Trajectory {
            inner: out.trajectory,
            metric,
            summary: serde_json::to_string(&out.summary).expect("summary serializes"),
            csv: out.csv,
        })
    }

    /// Integrates and writes the requested outputs into `out_dir`.
    fn run(&self, py: Python<'_>, out_dir: &str) -> PyResult<Py<PyDict>> {
        let s = runner::run_integrate(&self.inner, out_dir.as_ref()).map_err(run_err)?;
        Ok(to_dict(py, &s)?.unbind())
    }

    #[pyo3(signature = (samples = 1000, tol = 1e-12))]
    fn check(&self, py: Python<'_>, samples: usize, tol: f64) -> PyResult<Py<PyDict>> {
        let r = runner::run_check(&self.inner, samples, tol).map_err(run_err)?;
        Ok(to_dict(py, &r)?.unbind())
    }

    #[pyo3(signature = (samples = 1000, tol = 1e-12))]
    fn correct(&self, py: Python<'_>, samples: usize, tol: f64) -> PyResult<Py<PyDict>> {
        let r = runner::run_correct(&self.inner, samples, tol).map_err(run_err)?;
        Ok(to_dict(py, &r)?.unbind())
    }

    fn __repr__(&self) -> String {
        format!("Scenario({})", self.inner.to_json().replace('\n', ""))
    }
}

/// Integrated trajectory with dense output.
#[pyclass(module = "relmech", frozen)]
struct Trajectory {
    inner: CoreTrajectory,
    metric: MetricField,
    summary: String,
    csv: String,
}

#[pymethods]
impl Trajectory {
    #[getter]
    fn t(&self) -> Vec<f64> {
        self.inner.samples().iter().map(|s| s.t).collect()
    }

    #[getter]
    fn x(&self) -> Vec<Vec<f64>> {
        self.inner.samples().iter().map(|s| s.point.x.clone()).collect()
    }

    #[getter]
    fn xdot(&self) -> Vec<Vec<f64>> {
        self.inner.samples().iter().map(|s| s.point.xdot.clone()).collect()
    }

    #[getter]
    fn csv(&self) -> &str {
        &self.csv
    }

    #[getter]
    fn summary<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        py.import("json")?
            .call_method1("loads", (&self.summary,))?
            .cast_into::<PyDict>()
            .map_err(Into::into)
    }

    /// `(x, xdot)` from the dense output.
    fn at(&self, t: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let p = self.inner.at(t).map_err(numeric)?;
        Ok((p.x, p.xdot))
    }

    /// Duration under the canonical time form, or under the coordinate
    /// clock `x^clock` when given.
    #[pyo3(signature = (clock = None))]
    fn duration(&self, clock: Option<usize>) -> PyResult<f64> {
        let choice = match clock {
            None => TimeFormChoice::CanonicalTheta,
            Some(i) if i < self.inner.dim() => {
                TimeFormChoice::CoordinateClock(ScalarField::coordinate(self.inner.dim(), i))
            }
            Some(i) => return Err(PyValueError::new_err(format!("clock index {i} out of range"))),
        };
        timeflow::duration(&self.inner, &choice, Some(&self.metric)).map_err(numeric)
    }

    fn proper_time(&self) -> PyResult<f64> {
        timeflow::proper_time(&self.inner, &self.metric).map_err(numeric)
    }

    fn energy_drift(&self) -> PyResult<f64> {
        dynamics::energy_drift(&self.inner, &self.metric).map_err(numeric)
    }

    fn __len__(&self) -> usize {
        self.inner.samples().len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Trajectory(dim={}, t=[{}, {}], samples={})",
            self.inner.dim(),
            self.inner.t0(),
            self.inner.t1(),
            self.inner.samples().len()
        )
    }
}

/// `(lambda, mu)` of the two-particle example.
#[pyfunction]
fn speed_constants(eta: f64) -> (f64, f64) {
    paradox::speed_constants(eta)
}

/// Durations and proper times of the charged and neutral particles.
#[pyfunction]
#[pyo3(signature = (eta = 1.0, mode = "closed"))]
fn paradox_report(py: Python<'_>, eta: f64, mode: &str) -> PyResult<Py<PyDict>> {
    let r = paradox::paradox_report(eta, report_mode(mode)?).map_err(numeric)?;
    Ok(to_dict(py, &r)?.unbind())
}

/// Speed factor of the free chord that leaves `A` and reaches the charged
/// particle at parameter `s`.
#[pyfunction]
fn chord_speed(eta: f64, s: f64) -> PyResult<f64> {
    paradox::k_c(eta, s).map_err(numeric)
}

/// Charged (`eta`) scenario as JSON.
#[pyfunction]
#[pyo3(signature = (eta = 1.0))]
fn charged_scenario(eta: f64) -> Scenario {
    Scenario {
        inner: runner::charged_scenario(eta),
    }
}

/// Neutral (`eta`) scenario as JSON.
#[pyfunction]
#[pyo3(signature = (eta = 1.0))]
fn neutral_scenario(eta: f64) -> Scenario {
    Scenario {
        inner: runner::neutral_scenario(eta),
    }
}

/// Evaluates an expression in `x0..` (and `xdot0..` when `xdot` is given).
#[pyfunction]
#[pyo3(signature = (src, x, xdot = None))]
fn eval_expr(src: &str, x: Vec<f64>, xdot: Option<Vec<f64>>) -> PyResult<f64> {
    let e = expr::parse(src, x.len(), xdot.is_some()).map_err(|e| PyValueError::new_err(e.to_string()))?;
    e.eval(&x, xdot.as_deref())
        .map_err(|e| NumericalError::new_err(e.to_string()))
}

#[pymodule]
fn relmech(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Scenario>()?;
    m.add_class::<Trajectory>()?;
    m.add_function(wrap_pyfunction!(speed_constants, m)?)?;
    m.add_function(wrap_pyfunction!(paradox_report, m)?)?;
    m.add_function(wrap_pyfunction!(chord_speed, m)?)?;
    m.add_function(wrap_pyfunction!(charged_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(neutral_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(eval_expr, m)?)?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    Ok(())
}
