//! `oldroyd_lab`: Python access to parameters, Green functions, states,
//! the pseudo-spectral solver, monitors and the experiment commands.

#![allow(clippy::result_large_err)]

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use oldroyd_core::decay::{self, Branch, InitialProfile, QuadratureConfig};
use oldroyd_core::experiments::config::Config;
use oldroyd_core::init::{self, RandomSpec, StressMode, TaylorGreenSpec};
use oldroyd_core::monitors::{EtaCoefficients, Monitor};
use oldroyd_core::propagator::{self, ModeState};
use oldroyd_core::solver::{self, SimState, StepConfig};
use oldroyd_core::spectral::{Grid, PhysParams};
use oldroyd_core::{checkpoint, experiments, Error};
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyOSError::new_err(e.to_string()),
        Error::BlowUp { .. } | Error::Quadrature { .. } => PyRuntimeError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn to_dict<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Physical parameters `(alpha, beta, kappa, mu)`.
#[pyclass(name = "Params", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
pub struct PyParams(PhysParams);

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (alpha=1.0, beta=1.0, kappa=1.0, mu=0.0))]
    fn new(alpha: f64, beta: f64, kappa: f64, mu: f64) -> PyResult<Self> {
        PhysParams::new(alpha, beta, kappa, mu).map(Self).map_err(py_err)
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha
    }
    #[getter]
    fn beta(&self) -> f64 {
        self.0.beta
    }
    #[getter]
    fn kappa(&self) -> f64 {
        self.0.kappa
    }
    #[getter]
    fn mu(&self) -> f64 {
        self.0.mu
    }

    fn critical_wavenumber(&self) -> f64 {
        self.0.critical_wavenumber()
    }

    /// `radius`, `theta`, `eta`, `t1` and `xi_c`.
    fn constants<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let c = propagator::constants(&self.0);
        let d = PyDict::new(py);
        d.set_item("radius", c.radius)?;
        d.set_item("theta", c.theta)?;
        d.set_item("eta", c.eta)?;
        d.set_item("t1", c.t1)?;
        d.set_item("xi_c", c.xi_c)?;
        Ok(d)
    }

    fn eigenvalues(&self, xi: f64) -> (C64, C64) {
        propagator::eigenvalues(&self.0, xi)
    }

    /// `(G1, G2, G3)` at `|xi|` and `t`.
    fn green(&self, xi: f64, t: f64) -> PyResult<(f64, f64, f64)> {
        let g = propagator::green_eval(&self.0, xi, t).map_err(py_err)?;
        Ok((g.g1, g.g2, g.g3))
    }

    /// Propagates one mode `(u, sigma)` by `t`; each is a pair of complex numbers.
    fn propagate(&self, u: [C64; 2], sigma: [C64; 2], xi: f64, t: f64) -> PyResult<([C64; 2], [C64; 2])> {
        let m = ModeState::new(u, sigma, xi).map_err(py_err)?;
        let out = propagator::propagate_mode(&self.0, &m, t).map_err(py_err)?;
        Ok((out.u, out.sigma))
    }

    /// Same as `propagate` but by RK4 on the mode system.
    fn propagate_oracle(&self, u: [C64; 2], sigma: [C64; 2], xi: f64, t: f64, dt: f64) -> PyResult<([C64; 2], [C64; 2])> {
        let m = ModeState::new(u, sigma, xi).map_err(py_err)?;
        let out = propagator::mode_ode_oracle(&self.0, &m, t, dt).map_err(py_err)?;
        Ok((out.u, out.sigma))
    }

    fn __repr__(&self) -> String {
        let p = self.0;
        format!("Params(alpha={}, beta={}, kappa={}, mu={})", p.alpha, p.beta, p.kappa, p.mu)
    }
}

/// Spectral state `(u, tau)` on an `n × n` periodic grid.
#[pyclass(name = "State", skip_from_py_object)]
#[derive(Clone)]
pub struct PyState(SimState);

fn grid(n: usize, length: Option<f64>) -> PyResult<Grid> {
    Grid::new(n, length.unwrap_or(Grid::DEFAULT_LENGTH)).map_err(py_err)
}

const NAMES: [&str; 5] = ["u1", "u2", "tau11", "tau12", "tau22"];

#[pymethods]
impl PyState {
    #[staticmethod]
    #[pyo3(signature = (n, params, length=None))]
    fn zeros(n: usize, params: &PyParams, length: Option<f64>) -> PyResult<Self> {
        Ok(Self(SimState::zeros(grid(n, length)?, params.0)))
    }

    #[staticmethod]
    #[pyo3(signature = (n, params, length=None, seed=1, h3_norm=1e-2, band=0.25, width=0.1, relaxed=true))]
    #[allow(clippy::too_many_arguments)]
    fn random(
        n: usize,
        params: &PyParams,
        length: Option<f64>,
        seed: u64,
        h3_norm: f64,
        band: f64,
        width: f64,
        relaxed: bool,
    ) -> PyResult<Self> {
        let spec = RandomSpec {
            h3_norm,
            seed,
            band,
            width,
            stress: if relaxed { StressMode::Relaxed } else { StressMode::Independent },
            ..RandomSpec::default()
        };
        init::random_state(grid(n, length)?, params.0, &spec).map(Self).map_err(py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (n, params, length=None, mode=4, velocity_amplitude=1e-3, stress_amplitude=1e-3))]
    fn taylor_green(
        n: usize,
        params: &PyParams,
        length: Option<f64>,
        mode: i64,
        velocity_amplitude: f64,
        stress_amplitude: f64,
    ) -> PyResult<Self> {
        let spec = TaylorGreenSpec {
            mode,
            velocity_amplitude,
            stress_amplitude,
        };
        init::taylor_green_state(grid(n, length)?, params.0, &spec).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        checkpoint::read(&path).map(|(s, _)| Self(s)).map_err(py_err)
    }

    #[pyo3(signature = (path, config_hash=""))]
    fn save(&self, path: PathBuf, config_hash: &str) -> PyResult<()> {
        checkpoint::write(&path, &self.0, config_hash).map_err(py_err)
    }

    #[getter]
    fn t(&self) -> f64 {
        self.0.t
    }
    #[getter]
    fn n(&self) -> usize {
        self.0.grid().n()
    }
    #[getter]
    fn length(&self) -> f64 {
        self.0.grid().length()
    }
    #[getter]
    fn params(&self) -> PyParams {
        PyParams(self.0.params)
    }

    fn h3_norm(&self) -> f64 {
        self.0.h3_norm()
    }

    /// Row-major spectrum of `u1`, `u2`, `tau11`, `tau12` or `tau22`.
    fn spectrum(&self, name: &str) -> PyResult<Vec<C64>> {
        let i = NAMES
            .iter()
            .position(|n| *n == name)
            .ok_or_else(|| PyValueError::new_err(format!("unknown component {name:?}, expected one of {NAMES:?}")))?;
        Ok(self.0.components()[i].clone())
    }

    fn __repr__(&self) -> String {
        format!("State(n={}, t={}, h3_norm={:.6e})", self.n(), self.0.t, self.0.h3_norm())
    }
}

#[pyclass(name = "Solver")]
pub struct PySolver(solver::Solver);

#[pymethods]
impl PySolver {
    #[new]
    #[pyo3(signature = (n, length=None, dt=1e-2, order=4, nonlinear=true, dealias_fraction=2.0/3.0))]
    fn new(n: usize, length: Option<f64>, dt: f64, order: u32, nonlinear: bool, dealias_fraction: f64) -> PyResult<Self> {
        let cfg = StepConfig {
            dt,
            order,
            nonlinear,
            dealias_fraction,
        };
        solver::Solver::new(grid(n, length)?, cfg).map(Self).map_err(py_err)
    }

    /// Masks (when nonlinear), projects and symmetrizes.
    fn prepare(&self, state: &PyState) -> PyResult<PyState> {
        self.0.prepare(state.0.clone()).map(PyState).map_err(py_err)
    }

    fn step(&self, state: &PyState) -> PyResult<PyState> {
        self.0.step(&state.0).map(PyState).map_err(py_err)
    }

    fn advance(&self, py: Python<'_>, state: &PyState, horizon: f64) -> PyResult<PyState> {
        let s0 = state.0.clone();
        py.detach(|| self.0.advance_with(&s0, horizon, horizon.max(self.0.config().dt), |_| Ok(())))
            .map(PyState)
            .map_err(|(e, _)| py_err(e))
    }

    /// `(dE/dt, dissipation)` of the semi-discrete system at `state`.
    fn energy_rate(&self, state: &PyState) -> PyResult<(f64, f64)> {
        self.0.energy_rate(&state.0).map_err(py_err)
    }

    /// Monitor reports sampled every `sample_every` up to `horizon`.
    #[pyo3(signature = (state, horizon, sample_every, eta1=0.01))]
    fn run<'py>(&self, py: Python<'py>, state: &PyState, horizon: f64, sample_every: f64, eta1: f64) -> PyResult<Bound<'py, PyAny>> {
        let s0 = state.0.clone();
        let out = py.detach(|| self.0.run(&s0, horizon, sample_every, EtaCoefficients::from_eta1(eta1)));
        if let Some(e) = out.error {
            return Err(py_err(e));
        }
        let reports: Vec<_> = out.samples.into_iter().map(|(_, r)| r).collect();
        to_dict(py, &reports)
    }
}

/// Lyapunov functionals, Sobolev norms and splitting diagnostics of `state`.
#[pyfunction]
#[pyo3(signature = (state, dt=1e-2, eta1=0.01))]
fn monitor<'py>(py: Python<'py>, state: &PyState, dt: f64, eta1: f64) -> PyResult<Bound<'py, PyAny>> {
    let cfg = StepConfig {
        dt,
        ..StepConfig::default()
    };
    let m = Monitor::new(state.0.grid(), cfg, EtaCoefficients::from_eta1(eta1)).map_err(py_err)?;
    to_dict(py, &m.evaluate(&state.0).map_err(py_err)?)
}

/// `‖∇ᵏu_lin(t)‖` (branch "u") or `‖∇ᵏσ_lin(t)‖` (branch "sigma") for
/// Gaussian data, evaluated by radial quadrature.
#[pyfunction]
#[pyo3(signature = (params, k, branch, times, u_amp=1.0, u_width=1.0, sigma_amp=1.0, sigma_width=1.0))]
#[allow(clippy::too_many_arguments)]
fn decay_series(
    params: &PyParams,
    k: u32,
    branch: &str,
    times: Vec<f64>,
    u_amp: f64,
    u_width: f64,
    sigma_amp: f64,
    sigma_width: f64,
) -> PyResult<Vec<f64>> {
    let branch = match branch {
        "u" => Branch::Velocity,
        "sigma" => Branch::Stress,
        other => return Err(PyValueError::new_err(format!("branch must be 'u' or 'sigma', got {other:?}"))),
    };
    let radius = propagator::constants(&params.0).radius;
    let ic = InitialProfile::gaussian(u_amp, u_width, sigma_amp, sigma_width, radius).map_err(py_err)?;
    let s = decay::decay_series(&params.0, &ic, k, branch, &times, &QuadratureConfig::default()).map_err(py_err)?;
    Ok(s.values)
}

/// Least-squares slope of `log value` against `log(1+t)` on `[lo, hi]`.
#[pyfunction]
fn fit_slope(times: Vec<f64>, values: Vec<f64>, lo: f64, hi: f64) -> PyResult<(f64, f64)> {
    let s = decay::DecaySeries::new(times, values, 0, Branch::Velocity).map_err(py_err)?;
    let fit = decay::fit_decay_exponent(&s, [lo, hi]).map_err(py_err)?;
    Ok((fit.slope, fit.stderr))
}

/// Runs `validate-green`, `linear-decay`, `simulate` or `sweep-mu` with a TOML
/// config. Returns `(run_id, exit_code, run_dir)`.
#[pyfunction]
#[pyo3(signature = (command, config="", out="runs"))]
fn run_command(py: Python<'_>, command: &str, config: &str, out: &str) -> PyResult<(String, i32, String)> {
    let cfg = Config::parse(config).map_err(py_err)?;
    let rec = py
        .detach(|| experiments::run_command(command, &cfg, Path::new(out)))
        .map_err(py_err)?;
    Ok((rec.run_id, rec.exit.code(), rec.dir.to_string_lossy().into_owned()))
}

#[pymodule]
pub fn oldroyd_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyState>()?;
    m.add_class::<PySolver>()?;
    m.add_function(wrap_pyfunction!(monitor, m)?)?;
    m.add_function(wrap_pyfunction!(decay_series, m)?)?;
    m.add_function(wrap_pyfunction!(fit_slope, m)?)?;
    m.add_function(wrap_pyfunction!(run_command, m)?)?;
    Ok(())
}
