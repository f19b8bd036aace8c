//! Python bindings for the magnodrag core.

use num_complex::Complex64;
use pyo3::exceptions::{PyKeyError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use magnodrag_core::config::ConfigFile;
use magnodrag_core::params::{self as core_params, DriveSpec};
use magnodrag_core::presets;
use magnodrag_core::response::{self, DragQuadrature};
use magnodrag_core::steady::{self, BranchPolicy};
use magnodrag_core::sweep::{self, Axis, Override};
use magnodrag_core::DetuningConvention;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// Hand a serde document to Python through the json module.
fn to_python<'py>(py: Python<'py>, v: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(runtime_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn branch_policy(name: &str) -> PyResult<BranchPolicy> {
    match name {
        "lowest" => Ok(BranchPolicy::Lowest),
        "highest" => Ok(BranchPolicy::Highest),
        "continuation" => Ok(BranchPolicy::Continuation { previous: None }),
        other => Err(value_err(format!("unknown branch policy `{other}`"))),
    }
}

fn quadrature(name: &str) -> PyResult<DragQuadrature> {
    match name {
        "dispersive" => Ok(DragQuadrature::Dispersive),
        "real" => Ok(DragQuadrature::Real),
        other => Err(value_err(format!("unknown quadrature `{other}`"))),
    }
}

/// System parameters in SI angular units (rad/s).
#[pyclass(name = "SystemParams", module = "magnodrag", from_py_object)]
#[derive(Clone)]
struct PySystemParams {
    inner: core_params::SystemParams,
}

#[pymethods]
impl PySystemParams {
    /// Built-in published parameter set with the given medium length (m).
    #[staticmethod]
    fn reference(medium_length: f64) -> PyResult<Self> {
        let inner = core_params::SystemParams::reference(medium_length);
        inner.validate().map_err(value_err)?;
        Ok(Self { inner })
    }

    /// Parse a JSON config document.
    #[staticmethod]
    fn from_config(text: &str) -> PyResult<Self> {
        let r = ConfigFile::parse(text)
            .and_then(|c| c.resolve())
            .map_err(value_err)?;
        Ok(Self { inner: r.params })
    }

    #[staticmethod]
    fn from_config_file(path: std::path::PathBuf) -> PyResult<Self> {
        let r = ConfigFile::load(&path)
            .and_then(|c| c.resolve())
            .map_err(value_err)?;
        Ok(Self { inner: r.params })
    }

    /// Copy with Γ = ratio·ω_b.
    fn with_coupling_ratio(&self, ratio: f64) -> PyResult<Self> {
        let mut inner = self.inner;
        inner.coupling = ratio * inner.omega_b;
        inner.validate().map_err(value_err)?;
        Ok(Self { inner })
    }

    /// Copy driven by `watts` of microwave power.
    fn with_power(&self, watts: f64) -> PyResult<Self> {
        let mut inner = self.inner;
        inner.drive = DriveSpec::Power { watts };
        inner.validate().map_err(value_err)?;
        Ok(Self { inner })
    }

    /// Copy using the bare (`True`) or effective detuning convention.
    fn with_bare_detuning(&self, bare: bool) -> Self {
        let mut inner = self.inner;
        inner.detuning_convention = if bare {
            DetuningConvention::Bare
        } else {
            DetuningConvention::Effective
        };
        Self { inner }
    }

    #[getter]
    fn omega_b(&self) -> f64 {
        self.inner.omega_b
    }
    #[getter]
    fn kappa_c(&self) -> f64 {
        self.inner.kappa_c
    }
    #[getter]
    fn kappa_m(&self) -> f64 {
        self.inner.kappa_m
    }
    #[getter]
    fn gamma_b(&self) -> f64 {
        self.inner.gamma_b
    }
    #[getter]
    fn coupling(&self) -> f64 {
        self.inner.coupling
    }
    #[getter]
    fn g_mb(&self) -> f64 {
        self.inner.g_mb
    }
    #[getter]
    fn medium_length(&self) -> f64 {
        self.inner.medium_length
    }

    /// Magnon drive Rabi frequency ε_m, rad/s.
    fn epsilon_m(&self) -> PyResult<f64> {
        self.inner.epsilon_m().map_err(value_err)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_python(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "SystemParams(Gamma/omega_b={:.4}, drive={:?}, l={} m)",
            self.inner.coupling / self.inner.omega_b,
            self.inner.drive,
            self.inner.medium_length
        )
    }
}

#[pyclass(name = "SteadyState", module = "magnodrag", frozen)]
struct PySteadyState {
    inner: steady::SteadyState,
    g_eff: Complex64,
}

#[pymethods]
impl PySteadyState {
    #[getter]
    fn m_s(&self) -> Complex64 {
        self.inner.m_s
    }
    #[getter]
    fn c_s(&self) -> Complex64 {
        self.inner.c_s
    }
    #[getter]
    fn b_s(&self) -> Complex64 {
        self.inner.b_s
    }
    /// G_mb = g_mb·m_s, rad/s.
    #[getter]
    fn g_eff(&self) -> Complex64 {
        self.g_eff
    }
    /// Physical roots |m_s|², ascending.
    #[getter]
    fn roots(&self) -> Vec<f64> {
        self.inner.roots.clone()
    }
    #[getter]
    fn branch(&self) -> &'static str {
        self.inner.branch.as_str()
    }
    #[getter]
    fn delta_m_eff(&self) -> f64 {
        self.inner.delta_m_eff
    }
    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual
    }
    #[getter]
    fn magnon_number(&self) -> f64 {
        self.inner.magnon_number()
    }

    fn __repr__(&self) -> String {
        format!(
            "SteadyState(|m_s|^2={:.6e}, branch={}, residual={:.1e})",
            self.inner.magnon_number(),
            self.inner.branch.as_str(),
            self.inner.residual
        )
    }
}

/// Solve the steady state at the drive implied by `params`.
#[pyfunction]
#[pyo3(signature = (params, branch = "lowest"))]
fn solve_steady(params: &PySystemParams, branch: &str) -> PyResult<PySteadyState> {
    let p = &params.inner;
    let eps = p.epsilon_m().map_err(value_err)?;
    let inner = steady::solve_steady(p, eps, branch_policy(branch)?).map_err(runtime_err)?;
    let g_eff = inner.g_eff(p);
    Ok(PySteadyState { inner, g_eff })
}

/// Probe response at detuning `sigma` (rad/s). Returns a dict with
/// `c_plus`, `eps_t`, `chi`, `n_r`, `n_g` and, when `velocity` is given,
/// `drag` (m).
#[pyfunction]
#[pyo3(signature = (params, g_eff, sigma, eps_p = 1.0, velocity = None, quadrature = "dispersive"))]
fn probe_response<'py>(
    py: Python<'py>,
    params: &PySystemParams,
    g_eff: Complex64,
    sigma: f64,
    eps_p: f64,
    velocity: Option<f64>,
    quadrature: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let r = response::probe_response(
        &params.inner,
        g_eff,
        sigma,
        eps_p,
        velocity,
        self::quadrature(quadrature)?,
    )
    .map_err(runtime_err)?;
    let d = PyDict::new(py);
    d.set_item("c_plus", r.c_plus)?;
    d.set_item("eps_t", r.eps_t)?;
    d.set_item("chi", r.chi)?;
    d.set_item("n_r", r.n_r)?;
    d.set_item("n_g", r.n_g)?;
    d.set_item("drag", r.drag.map(|d| d.displacement))?;
    Ok(d)
}

#[pyclass(name = "SpectrumTable", module = "magnodrag", frozen)]
struct PySpectrumTable {
    inner: sweep::SpectrumTable,
}

#[pymethods]
impl PySpectrumTable {
    #[getter]
    fn axis(&self) -> &'static str {
        self.inner.axis.column_name()
    }

    fn __len__(&self) -> usize {
        self.inner.rows.len()
    }

    #[getter]
    fn failed_rows(&self) -> usize {
        self.inner.failed_rows()
    }

    /// Columns as lists; failed rows hold `None` and name their reason in
    /// `flag`.
    fn columns<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let rows = &self.inner.rows;
        let pick = |f: &dyn Fn(&sweep::RowValues) -> Complex64| -> Vec<Option<Complex64>> {
            rows.iter().map(|r| r.values().map(f)).collect()
        };
        let d = PyDict::new(py);
        d.set_item(
            self.inner.axis.column_name(),
            rows.iter().map(|r| r.axis_value).collect::<Vec<_>>(),
        )?;
        d.set_item("eps_t", pick(&|v| v.eps_t))?;
        d.set_item("n_r", pick(&|v| v.n_r))?;
        d.set_item("n_g", pick(&|v| v.n_g))?;
        d.set_item(
            "drag",
            rows.iter()
                .map(|r| r.values().and_then(|v| v.drag))
                .collect::<Vec<_>>(),
        )?;
        d.set_item(
            "flag",
            rows.iter()
                .map(|r| r.outcome.as_ref().err().map_or("ok", |f| f.as_str()))
                .collect::<Vec<_>>(),
        )?;
        Ok(d)
    }

    /// Windows, peaks, luminality and drag extrema as a dict.
    fn features<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let report = sweep::extract_features(&self.inner).map_err(value_err)?;
        to_python(py, &report)
    }

    /// The table as CSV text in the command-line tool's format.
    fn to_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        let curve = sweep::Curve {
            label: None,
            table: self.inner.clone(),
        };
        sweep::write_csv(&mut buf, std::slice::from_ref(&curve)).map_err(runtime_err)?;
        String::from_utf8(buf).map_err(runtime_err)
    }
}

fn parse_axis(name: &str) -> PyResult<Axis> {
    Axis::from_column_name(name)
        .ok_or_else(|| value_err(format!("unknown axis `{name}`; use sigma, velocity, Gamma or power")))
}

/// Sweep one axis. Axis units: σ/ω_b, m/s, Γ/ω_b or W. Keyword overrides
/// use the same units and apply before the axis value.
#[pyfunction]
#[pyo3(signature = (params, axis, lo, hi, samples, *, coupling = None, power = None,
                    sigma = None, velocity = None, branch = "lowest", quadrature = "dispersive"))]
#[allow(clippy::too_many_arguments)]
fn run_sweep(
    py: Python<'_>,
    params: &PySystemParams,
    axis: &str,
    lo: f64,
    hi: f64,
    samples: usize,
    coupling: Option<f64>,
    power: Option<f64>,
    sigma: Option<f64>,
    velocity: Option<f64>,
    branch: &str,
    quadrature: &str,
) -> PyResult<PySpectrumTable> {
    let mut spec = sweep::SweepSpec::new(parse_axis(axis)?, (lo, hi), samples, params.inner);
    let overrides = [
        coupling.map(Override::Coupling),
        power.map(Override::Power),
        sigma.map(Override::Sigma),
        velocity.map(Override::Velocity),
    ];
    for o in overrides.into_iter().flatten() {
        spec = spec.with_override(o);
    }
    spec.branch = branch_policy(branch)?;
    spec.quadrature = self::quadrature(quadrature)?;
    let inner = py.detach(|| sweep::run_sweep(&spec)).map_err(runtime_err)?;
    Ok(PySpectrumTable { inner })
}

/// Run a figure preset; returns `{label: SpectrumTable}` in family order.
#[pyfunction]
fn figure<'py>(
    py: Python<'py>,
    id: &str,
    params: &PySystemParams,
) -> PyResult<Bound<'py, PyDict>> {
    let preset = presets::preset(id, &params.inner)
        .ok_or_else(|| PyKeyError::new_err(format!("unknown figure `{id}`")))?;
    let d = PyDict::new(py);
    for (label, spec) in &preset.curves {
        let inner = py.detach(|| sweep::run_sweep(spec)).map_err(runtime_err)?;
        d.set_item(label, PySpectrumTable { inner })?;
    }
    Ok(d)
}

#[pymodule]
fn magnodrag(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystemParams>()?;
    m.add_class::<PySteadyState>()?;
    m.add_class::<PySpectrumTable>()?;
    m.add_function(wrap_pyfunction!(solve_steady, m)?)?;
    m.add_function(wrap_pyfunction!(probe_response, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(figure, m)?)?;
    m.add("FIGURES", presets::IDS.to_vec())?;
    Ok(())
}
