//! Python bindings: the spectral field calculus, Wiener paths, both
//! integrators, and the Monte Carlo estimators, exposed with plain
//! Python types (tuples, lists, bytes).

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use gsqg::brownian::{self, BrownianPath, Detection};
use gsqg::diagnostics;
use gsqg::ensemble;
use gsqg::field::FourierField;
use gsqg::ops;
use gsqg::picard;
use gsqg::snapshot;
use gsqg::solver::{self, OverflowPolicy, Scheme, SolverConfig};
use gsqg::{GevreyParams, SpectralGrid};

fn err(e: gsqg::Error) -> PyErr {
    match e {
        gsqg::Error::InvalidParams(_)
        | gsqg::Error::InvalidGrid(_)
        | gsqg::Error::InvalidMode { .. }
        | gsqg::Error::Config(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

#[pyclass(name = "Params", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: GevreyParams,
}

#[pymethods]
impl PyParams {
    #[new]
    fn new(nu: f64, s: f64, sigma: f64, alpha: f64, beta: f64, epsilon: f64) -> PyResult<Self> {
        Ok(PyParams {
            inner: GevreyParams::new(nu, s, sigma, alpha, beta, epsilon).map_err(err)?,
        })
    }

    #[getter]
    fn nu(&self) -> f64 {
        self.inner.nu
    }
    #[getter]
    fn s(&self) -> f64 {
        self.inner.s
    }
    #[getter]
    fn sigma(&self) -> f64 {
        self.inner.sigma
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
    fn epsilon(&self) -> f64 {
        self.inner.epsilon
    }

    fn phi(&self, t: f64) -> f64 {
        self.inner.phi(t)
    }

    fn admissibility_threshold(&self) -> f64 {
        self.inner.admissibility_threshold()
    }

    /// Infinite-horizon probability that nu W - beta t ever exceeds `level`.
    fn crossing_probability(&self, level: f64) -> f64 {
        self.inner.crossing_probability(level)
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

#[pyclass(name = "Grid", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGrid {
    inner: SpectralGrid,
}

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (n, dealias_cutoff=None))]
    fn new(n: usize, dealias_cutoff: Option<f64>) -> PyResult<Self> {
        let inner = match dealias_cutoff {
            Some(c) => SpectralGrid::with_cutoff(n, c),
            None => SpectralGrid::new(n),
        }
        .map_err(err)?;
        Ok(PyGrid { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn dealias_cutoff(&self) -> f64 {
        self.inner.dealias_cutoff()
    }

    fn __repr__(&self) -> String {
        format!("Grid(n={}, dealias_cutoff={})", self.inner.n(), self.inner.dealias_cutoff())
    }
}

#[pyclass(name = "Field", skip_from_py_object)]
#[derive(Clone)]
struct PyField {
    inner: FourierField,
}

#[pymethods]
impl PyField {
    /// Zero field on `grid`.
    #[staticmethod]
    fn zero(grid: &PyGrid) -> Self {
        PyField {
            inner: FourierField::zero(grid.inner),
        }
    }

    /// Field from `[(k1, k2, re, im), ...]`; Hermitian mirrors auto-filled.
    #[staticmethod]
    fn from_modes(grid: &PyGrid, modes: Vec<(i32, i32, f64, f64)>) -> PyResult<Self> {
        let modes: Vec<((i32, i32), Complex64)> = modes
            .into_iter()
            .map(|(k1, k2, re, im)| ((k1, k2), Complex64::new(re, im)))
            .collect();
        Ok(PyField {
            inner: FourierField::from_modes(grid.inner, &modes).map_err(err)?,
        })
    }

    /// Seeded Gaussian field normalized to `target_norm` in the Gevrey
    /// norm at radius alpha + epsilon.
    #[staticmethod]
    fn random(
        seed: u64,
        grid: &PyGrid,
        params: &PyParams,
        target_norm: f64,
        spectral_slope: f64,
    ) -> PyResult<Self> {
        Ok(PyField {
            inner: FourierField::random(seed, grid.inner, &params.inner, target_norm, spectral_slope)
                .map_err(err)?,
        })
    }

    fn coeff(&self, k1: i32, k2: i32) -> (f64, f64) {
        let c = self.inner.coeff((k1, k2));
        (c.re, c.im)
    }

    fn nonzero_modes(&self) -> Vec<(i32, i32, f64, f64)> {
        self.inner
            .nonzero_modes()
            .into_iter()
            .map(|(k, c)| (k.0, k.1, c.re, c.im))
            .collect()
    }

    /// Real samples on the uniform N x N grid, row-major.
    fn to_physical(&self) -> PyResult<Vec<f64>> {
        self.inner.to_physical().map_err(err)
    }

    #[staticmethod]
    fn from_physical(grid: &PyGrid, samples: Vec<f64>) -> PyResult<Self> {
        Ok(PyField {
            inner: FourierField::from_physical(grid.inner, &samples).map_err(err)?,
        })
    }

    fn gevrey_norm(&self, phi_val: f64, params: &PyParams, gamma_index: f64) -> PyResult<f64> {
        ops::gevrey_norm(&self.inner, phi_val, &params.inner, gamma_index).map_err(err)
    }

    fn sobolev_norm(&self, r: f64) -> f64 {
        ops::sobolev_norm(&self.inner, r)
    }

    fn riesz_perp(&self) -> (Self, Self) {
        let (a, b) = ops::riesz_perp(&self.inner);
        (PyField { inner: a }, PyField { inner: b })
    }

    fn frac_deriv(&self, r: f64) -> Self {
        PyField {
            inner: ops::frac_deriv(&self.inner, r),
        }
    }

    fn gamma_apply(&self, tau: f64, params: &PyParams) -> PyResult<Self> {
        Ok(PyField {
            inner: ops::gamma_apply(&self.inner, tau, &params.inner).map_err(err)?,
        })
    }

    /// GSQG1 snapshot bytes.
    fn to_bytes(&self, s: f64) -> Vec<u8> {
        snapshot::to_bytes(&self.inner, s)
    }

    #[staticmethod]
    fn from_bytes(data: Vec<u8>) -> PyResult<(Self, f64)> {
        let (field, s) = snapshot::from_bytes(&data).map_err(err)?;
        Ok((PyField { inner: field }, s))
    }

    fn __repr__(&self) -> String {
        format!(
            "Field(n={}, nonzero={})",
            self.inner.grid().n(),
            self.inner.nonzero_modes().len()
        )
    }
}

#[pyclass(name = "Path", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPath {
    inner: BrownianPath,
}

#[pymethods]
impl PyPath {
    /// Seeded Wiener path on [0, horizon] at resolution `step`.
    #[staticmethod]
    fn sample(seed: u64, horizon: f64, step: f64) -> PyResult<Self> {
        Ok(PyPath {
            inner: BrownianPath::sample(seed, horizon, step).map_err(err)?,
        })
    }

    /// Forced-zero path.
    #[staticmethod]
    fn zeros(horizon: f64, step: f64) -> PyResult<Self> {
        Ok(PyPath {
            inner: BrownianPath::zeros(horizon, step).map_err(err)?,
        })
    }

    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    #[getter]
    fn step(&self) -> f64 {
        self.inner.step()
    }

    #[getter]
    fn horizon(&self) -> f64 {
        self.inner.horizon()
    }

    /// Brownian-bridge refinement by a power-of-two factor.
    fn refine(&self, factor: usize, subseed: u64) -> PyResult<Self> {
        Ok(PyPath {
            inner: self.inner.refine(factor, subseed).map_err(err)?,
        })
    }

    /// First nodal time with nu W - beta t > alpha.
    fn crossing_time(&self, params: &PyParams) -> Option<f64> {
        self.inner.crossing_time(&params.inner)
    }

    /// Crossing detection with exact bridge sampling between nodes.
    fn crossing_time_bridge(&self, params: &PyParams) -> Option<f64> {
        self.inner.crossing_time_bridge(&params.inner)
    }
}

/// One integrated trajectory: recorded norm series plus verdicts.
#[pyclass(name = "Trajectory", frozen)]
struct PyTrajectory {
    #[pyo3(get)]
    times: Vec<f64>,
    #[pyo3(get)]
    gevrey_norms: Vec<Option<f64>>,
    #[pyo3(get)]
    sobolev_norms: Vec<f64>,
    #[pyo3(get)]
    crossed: Vec<bool>,
    #[pyo3(get)]
    crossing_time: Option<f64>,
    #[pyo3(get)]
    monotone: bool,
    #[pyo3(get)]
    oracle_fallbacks: u64,
    #[pyo3(get)]
    terminal: PyField,
}

fn wrap_record(record: solver::TrajectoryRecord) -> PyTrajectory {
    PyTrajectory {
        times: record.samples.iter().map(|s| s.t).collect(),
        gevrey_norms: record.samples.iter().map(|s| s.gevrey_norm).collect(),
        sobolev_norms: record.samples.iter().map(|s| s.sobolev_norm).collect(),
        crossed: record.samples.iter().map(|s| s.crossed).collect(),
        crossing_time: record.crossing_time,
        monotone: record.monotone.pass,
        oracle_fallbacks: record.oracle_fallbacks,
        terminal: PyField {
            inner: record.terminal_field.expect("terminal field present"),
        },
    }
}

fn scheme_from(name: &str) -> PyResult<Scheme> {
    match name {
        "etdrk2" => Ok(Scheme::Etdrk2),
        "etdrk4" => Ok(Scheme::Etdrk4),
        other => Err(PyValueError::new_err(format!(
            "scheme must be etdrk2 or etdrk4, got '{other}'"
        ))),
    }
}

fn solver_config(u0: &PyField, dt: f64, t_end: f64, scheme: Scheme, record_every: usize) -> SolverConfig {
    SolverConfig {
        dt,
        t_end,
        scheme,
        grid: u0.inner.grid(),
        record_every,
        overflow_policy: OverflowPolicy::OracleFallback,
    }
}

/// Integrate the conjugated pathwise-deterministic equation.
#[pyfunction]
#[pyo3(signature = (u0, path, params, dt, t_end, scheme="etdrk2", record_every=1))]
fn integrate_transformed(
    u0: &PyField,
    path: &PyPath,
    params: &PyParams,
    dt: f64,
    t_end: f64,
    scheme: &str,
    record_every: usize,
) -> PyResult<PyTrajectory> {
    let cfg = solver_config(u0, dt, t_end, scheme_from(scheme)?, record_every);
    solver::integrate_transformed(&u0.inner, &path.inner, &cfg, &params.inner)
        .map(wrap_record)
        .map_err(err)
}

/// Integrate the original Ito equation on the same path grid.
#[pyfunction]
#[pyo3(signature = (theta0, path, params, dt, t_end, record_every=1))]
fn integrate_direct(
    theta0: &PyField,
    path: &PyPath,
    params: &PyParams,
    dt: f64,
    t_end: f64,
    record_every: usize,
) -> PyResult<PyTrajectory> {
    let cfg = solver_config(theta0, dt, t_end, Scheme::DirectSpde, record_every);
    solver::integrate_direct(&theta0.inner, &path.inner, &cfg, &params.inner)
        .map(wrap_record)
        .map_err(err)
}

/// theta = e^{+nu W |grad|^s} u.
#[pyfunction]
fn back_transform(u: &PyField, w_val: f64, params: &PyParams) -> PyResult<PyField> {
    Ok(PyField {
        inner: solver::back_transform(&u.inner, w_val, &params.inner).map_err(err)?,
    })
}

/// Fast dealiased bilinear form B(f, g) at Wiener value W.
#[pyfunction]
fn bilinear_b_fft(f: &PyField, g: &PyField, w_val: f64, params: &PyParams) -> PyResult<PyField> {
    Ok(PyField {
        inner: gsqg::bilinear::b_fft(&f.inner, &g.inner, w_val, &params.inner).map_err(err)?,
    })
}

/// Direct-convolution oracle for B(f, g).
#[pyfunction]
fn bilinear_b_direct(f: &PyField, g: &PyField, w_val: f64, params: &PyParams) -> PyResult<PyField> {
    Ok(PyField {
        inner: gsqg::bilinear::b_direct(&f.inner, &g.inner, w_val, &params.inner).map_err(err)?,
    })
}

/// Monte Carlo crossing probability; returns (estimate, std_error).
#[pyfunction]
#[pyo3(signature = (n_paths, horizon, step, params, master_seed, detection="bridge"))]
fn mc_crossing_probability(
    n_paths: u64,
    horizon: f64,
    step: f64,
    params: &PyParams,
    master_seed: u64,
    detection: &str,
) -> PyResult<(f64, f64)> {
    let detection = match detection {
        "nodal" => Detection::Nodal,
        "bridge" => Detection::Bridge,
        other => {
            return Err(PyValueError::new_err(format!(
                "detection must be nodal or bridge, got '{other}'"
            )))
        }
    };
    let est = brownian::mc_crossing_probability(
        n_paths,
        horizon,
        step,
        &params.inner,
        master_seed,
        detection,
    )
    .map_err(err)?;
    Ok((est.estimate, est.std_error))
}

/// Admissibility of initial data; returns (admissible, margin).
#[pyfunction]
fn condition_check(u0: &PyField, params: &PyParams) -> PyResult<(bool, f64)> {
    let rep = diagnostics::condition_check(&u0.inner, &params.inner).map_err(err)?;
    Ok((rep.admissible, rep.margin))
}

/// Per-iterate sup-norm differences of the local fixed-point solver.
#[pyfunction]
fn picard_differences(
    u0: &PyField,
    path: &PyPath,
    t_loc: f64,
    n_iter: usize,
    quad_dt: f64,
    params: &PyParams,
) -> PyResult<(Vec<f64>, Vec<f64>, String)> {
    let out = picard::picard_local_solve(&u0.inner, &path.inner, t_loc, n_iter, quad_dt, &params.inner)
        .map_err(err)?;
    Ok((
        out.differences,
        out.ratios,
        format!("{:?}", out.verdict),
    ))
}

/// Run a full ensemble from a TOML config; returns the report as JSON.
#[pyfunction]
#[pyo3(signature = (config_toml, workers=None))]
fn run_ensemble(config_toml: &str, workers: Option<usize>) -> PyResult<String> {
    let cfg = ensemble::RunConfig::from_toml_str(config_toml).map_err(err)?;
    let report = ensemble::run_ensemble(&cfg, workers).map_err(err)?;
    Ok(report.to_json())
}

#[pymodule]
fn gsqg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyPath>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(integrate_transformed, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_direct, m)?)?;
    m.add_function(wrap_pyfunction!(back_transform, m)?)?;
    m.add_function(wrap_pyfunction!(bilinear_b_fft, m)?)?;
    m.add_function(wrap_pyfunction!(bilinear_b_direct, m)?)?;
    m.add_function(wrap_pyfunction!(mc_crossing_probability, m)?)?;
    m.add_function(wrap_pyfunction!(condition_check, m)?)?;
    m.add_function(wrap_pyfunction!(picard_differences, m)?)?;
    m.add_function(wrap_pyfunction!(run_ensemble, m)?)?;
    Ok(())
}
