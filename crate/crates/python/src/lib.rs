//! Python bindings: flow parameters, symbol analysis, closed-form oracles, simulation runs
//! and the verification scenarios.

use pyo3::exceptions::{PyKeyError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ryflow_core::diagnostics::FlowRecord;
use ryflow_core::flow::{run, RunOutcome};
use ryflow_core::geometry::{ConformalTorusState, WarpedProductState};
use ryflow_core::io::{evaluate_monitors, records_to_csv, RunConfig, RunSummary};
use ryflow_core::{oracles, symbol, verify};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Flow coefficients `(alpha, beta)` in dimension `n`.
#[pyclass(name = "FlowParams", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyFlowParams {
    inner: ryflow_core::FlowParams,
}

#[pymethods]
impl PyFlowParams {
    #[new]
    #[pyo3(signature = (alpha, beta, n, allow_degenerate = false))]
    fn new(alpha: f64, beta: f64, n: usize, allow_degenerate: bool) -> PyResult<Self> {
        let inner = if allow_degenerate {
            ryflow_core::FlowParams::degenerate(alpha, beta, n)
        } else {
            ryflow_core::FlowParams::new(alpha, beta, n)
        };
        inner.map(|inner| Self { inner }).map_err(value_error)
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.dim
    }

    fn in_regime(&self) -> bool {
        self.inner.in_regime()
    }

    /// Symbol eigenvalue of the trace mode, `alpha + (n-1) beta`.
    fn trace_diffusivity(&self) -> f64 {
        self.inner.trace_diffusivity()
    }

    fn __repr__(&self) -> String {
        format!(
            "FlowParams(alpha={}, beta={}, n={})",
            self.inner.alpha, self.inner.beta, self.inner.dim
        )
    }
}

/// Eigenvalue clusters `[(value, multiplicity), ...]` of the principal symbol.
#[pyfunction]
fn symbol_spectrum(params: PyFlowParams) -> PyResult<Vec<(f64, usize)>> {
    let m = symbol::build_symbol_matrix(&params.inner).map_err(value_error)?;
    let clusters = symbol::symbol_spectrum(&m).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(clusters.into_iter().map(|e| (e.value, e.multiplicity)).collect())
}

/// `("elliptic" | "boundary" | "not_elliptic", min_eigenvalue)`.
#[pyfunction]
fn ellipticity(params: PyFlowParams) -> (String, f64) {
    let v = symbol::is_strongly_elliptic(&params.inner);
    (v.verdict.to_string(), v.min_eigenvalue)
}

/// Scale `c(t)` of an Einstein metric with `Ric(g0) = lam g0`; returns `(c, past_extinction)`.
#[pyfunction]
#[pyo3(signature = (params, lam, t, c0 = 1.0))]
fn einstein_scale(params: PyFlowParams, lam: f64, t: f64, c0: f64) -> PyResult<(f64, bool)> {
    let fam = oracles::EinsteinFamily::new(lam, c0, params.inner.dim).map_err(value_error)?;
    let c = oracles::einstein_scale(&fam, &params.inner, t).map_err(value_error)?;
    Ok((c.value, c.past_extinction))
}

/// Round cylinder profile `(phi, psi, past_extinction)` at time `t`.
#[pyfunction]
#[pyo3(signature = (params, t, r0 = 1.0, phi0 = 1.0))]
fn product_solution(params: PyFlowParams, t: f64, r0: f64, phi0: f64) -> PyResult<(f64, f64, bool)> {
    let s = oracles::product_metric_solution(r0, phi0, &params.inner, t).map_err(value_error)?;
    Ok((s.value.phi, s.value.psi, s.past_extinction))
}

/// Lifetime bound for initial data with `R >= a`; `inf` when no bound applies.
#[pyfunction]
fn blow_up_bound(params: PyFlowParams, a: f64) -> f64 {
    oracles::blow_up_bound(a, &params.inner)
}

/// Lower bound on `min R` at time `t`; returns `(value, past_extinction)`.
#[pyfunction]
fn scalar_min_comparison(params: PyFlowParams, a: f64, t: f64) -> PyResult<(f64, bool)> {
    let c = oracles::scalar_min_comparison(a, &params.inner, t).map_err(value_error)?;
    Ok((c.value, c.past_extinction))
}

/// Scalar curvature of `e^{2u} delta` on the `n x n` torus grid (`u` row-major).
#[pyfunction]
fn torus_scalar_curvature(u: Vec<f64>, n: usize) -> PyResult<Vec<f64>> {
    ConformalTorusState::new(u, n)
        .and_then(|s| s.scalar_curvature(false))
        .map_err(value_error)
}

/// Scalar curvature of `phi^2 ds^2 + psi^2 g_sphere` sampled on `[0, 2 pi)`.
#[pyfunction]
fn warped_scalar_curvature(phi: Vec<f64>, psi: Vec<f64>, n: usize) -> PyResult<Vec<f64>> {
    WarpedProductState::new(phi, psi, n)
        .and_then(|s| s.frame_curvature())
        .map(|f| f.scalar)
        .map_err(value_error)
}

/// Result of [`simulate`].
#[pyclass(frozen)]
struct RunResult {
    outcome: RunOutcome,
    summary: RunSummary,
}

#[pymethods]
impl RunResult {
    /// `reached_t_end`, `blowup_detected`, `degenerate_metric` or `max_steps`.
    #[getter]
    fn status(&self) -> &'static str {
        self.outcome.status.as_str()
    }

    #[getter]
    fn t_final(&self) -> f64 {
        self.outcome.t_final
    }

    #[getter]
    fn steps(&self) -> usize {
        self.outcome.steps
    }

    #[getter]
    fn exit_code(&self) -> i32 {
        self.summary.exit_code
    }

    #[getter]
    fn monitors_passed(&self) -> bool {
        self.summary.monitors_passed
    }

    #[getter]
    fn message(&self) -> &str {
        &self.outcome.message
    }

    /// One column of the time series by CSV header name.
    fn column(&self, name: &str) -> PyResult<Vec<f64>> {
        let idx = FlowRecord::CSV_HEADER
            .split(',')
            .position(|h| h == name)
            .ok_or_else(|| PyKeyError::new_err(format!("no column `{name}`; have {}", FlowRecord::CSV_HEADER)))?;
        Ok(self.outcome.records.iter().map(|r| r.csv_values()[idx]).collect())
    }

    fn csv(&self) -> String {
        records_to_csv(&self.outcome.records)
    }

    fn summary_json(&self) -> String {
        self.summary.to_json()
    }

    fn __len__(&self) -> usize {
        self.outcome.records.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "RunResult(status={}, t_final={}, steps={}, exit_code={})",
            self.status(),
            self.outcome.t_final,
            self.outcome.steps,
            self.summary.exit_code
        )
    }
}

/// Runs the flow described by a TOML config string. Relative data paths resolve against
/// `base_dir`. The GIL is released during the run.
#[pyfunction]
#[pyo3(signature = (config, base_dir = None, allow_degenerate = false, parallel = true))]
fn simulate(
    py: Python<'_>,
    config: &str,
    base_dir: Option<std::path::PathBuf>,
    allow_degenerate: bool,
    parallel: bool,
) -> PyResult<RunResult> {
    let mut cfg = RunConfig::parse(config, base_dir.as_deref(), allow_degenerate).map_err(value_error)?;
    let state = cfg.initial_state().map_err(value_error)?;
    cfg.integrator.parallel = parallel;
    let outcome = py
        .detach(|| run(&state, &cfg.params, &cfg.integrator))
        .map_err(value_error)?;
    cfg.integrator.parallel = false;
    let monitors = evaluate_monitors(&outcome, &cfg.params, &cfg.monitors, cfg.c_disc);
    let summary = RunSummary::new(&outcome, monitors, &cfg);
    Ok(RunResult { outcome, summary })
}

/// Runs a built-in scenario; returns `(passed, report_json)`.
#[pyfunction]
fn verify_scenario(py: Python<'_>, name: &str) -> PyResult<(bool, String)> {
    let report = py
        .detach(|| verify::run_scenario(name))
        .ok_or_else(|| PyKeyError::new_err(format!("unknown scenario `{name}`")))?
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let text = serde_json::to_string_pretty(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok((report.passed, text))
}

/// Runs the command-line interface with `args` (without the program name); returns the exit code.
#[pyfunction]
fn main(py: Python<'_>, args: Vec<String>) -> i32 {
    py.detach(|| ryflow_core::cli::run_cli(std::iter::once("ryflow".to_string()).chain(args)))
}

#[pymodule]
fn ryflow(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFlowParams>()?;
    m.add_class::<RunResult>()?;
    m.add("SCENARIOS", verify::SCENARIOS.to_vec())?;
    m.add_function(wrap_pyfunction!(symbol_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(ellipticity, m)?)?;
    m.add_function(wrap_pyfunction!(einstein_scale, m)?)?;
    m.add_function(wrap_pyfunction!(product_solution, m)?)?;
    m.add_function(wrap_pyfunction!(blow_up_bound, m)?)?;
    m.add_function(wrap_pyfunction!(scalar_min_comparison, m)?)?;
    m.add_function(wrap_pyfunction!(torus_scalar_curvature, m)?)?;
    m.add_function(wrap_pyfunction!(warped_scalar_curvature, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(verify_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(main, m)?)?;
    Ok(())
}
