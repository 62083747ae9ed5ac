//! Python bindings.
//!
//! Errors from invalid input (domains, labels, tables) surface as
//! `ValueError`; numerical failures such as a singular auxiliary solution
//! surface as `RuntimeError`.

use std::path::PathBuf;
use std::sync::Arc;

use dunkl_pauli::angular::{self, AngularIndex, Sector, Sign};
use dunkl_pauli::dunkl::DeformationParams;
use dunkl_pauli::ep::{self, EpInitial};
use dunkl_pauli::ode::OdeOptions;
use dunkl_pauli::profiles::TimeProfiles;
use dunkl_pauli::verification::{self, PdeCheck, SpinTermMode};
use dunkl_pauli::wavefunction::{AngularBasis, Charge, Coupling, QuantumNumbers};
use dunkl_pauli::{Grid, ThetaGrid};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn core_err(e: dunkl_pauli::Error) -> PyErr {
    use dunkl_pauli::Error as E;
    match e {
        E::Domain(_)
        | E::Structure(_)
        | E::Construction { .. }
        | E::Usage(_)
        | E::Table(_)
        | E::Unsupported(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn sign(v: i64) -> PyResult<Sign> {
    Sign::from_i64(v).map_err(core_err)
}

fn json_to_py<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Reflection coupling constants `nu1`, `nu2 > -1/2`.
#[pyclass(name = "DeformationParams", module = "dunkl_pauli", frozen)]
struct PyParams(DeformationParams);

#[pymethods]
impl PyParams {
    #[new]
    fn new(nu1: f64, nu2: f64) -> PyResult<Self> {
        DeformationParams::new(nu1, nu2).map(Self).map_err(core_err)
    }

    #[getter]
    fn nu1(&self) -> f64 {
        self.0.nu1()
    }

    #[getter]
    fn nu2(&self) -> f64 {
        self.0.nu2()
    }

    fn __repr__(&self) -> String {
        format!("DeformationParams(nu1={}, nu2={})", self.0.nu1(), self.0.nu2())
    }
}

/// Mass, frequency and cyclotron frequency as functions of time.
#[pyclass(name = "Profiles", module = "dunkl_pauli", frozen)]
struct PyProfiles(TimeProfiles);

#[pymethods]
impl PyProfiles {
    #[staticmethod]
    fn constant(mass: f64, omega: f64, omega_c: f64) -> Self {
        Self(TimeProfiles::constant(mass, omega, omega_c))
    }

    /// Same schema as the `profiles` block of a scenario file, without `table`.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(Self).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// Reads a `t,m,omega,omega_c` table and interpolates it with cubic splines.
    #[staticmethod]
    fn from_csv(path: PathBuf) -> PyResult<Self> {
        TimeProfiles::from_csv_path(&path).map(Self).map_err(core_err)
    }

    fn mass(&self, t: f64) -> f64 {
        self.0.mass(t)
    }

    fn omega(&self, t: f64) -> f64 {
        self.0.omega(t)
    }

    fn omega_c(&self, t: f64) -> f64 {
        self.0.omega_c(t)
    }

    fn omega_eff(&self, t: f64) -> f64 {
        self.0.omega_eff(t)
    }

    #[getter]
    fn is_constant(&self) -> bool {
        self.0.is_constant()
    }
}

fn initial_data(profiles: &TimeProfiles, t0: f64, rho0: Option<f64>, rho_dot0: f64) -> PyResult<EpInitial> {
    match rho0 {
        Some(rho) => Ok(EpInitial { rho, rho_dot: rho_dot0 }),
        None => EpInitial::fixed_point(profiles, t0).map_err(core_err),
    }
}

/// Auxiliary width `rho(t)` sampled at increasing times.
#[pyclass(name = "EpSolution", module = "dunkl_pauli", frozen)]
struct PyEpSolution(ep::EpSolution);

#[pymethods]
impl PyEpSolution {
    #[getter]
    fn t0(&self) -> f64 {
        self.0.t0
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.0.times()
    }

    #[getter]
    fn rho(&self) -> Vec<f64> {
        self.0.states.iter().map(|s| s.rho).collect()
    }

    #[getter]
    fn rho_dot(&self) -> Vec<f64> {
        self.0.states.iter().map(|s| s.rho_dot).collect()
    }

    /// Relative residual of the auxiliary equation at each sample.
    fn residuals(&self) -> Vec<f64> {
        self.0.residuals()
    }

    /// Interpolated state at `t` as a dict.
    fn state_at<'py>(&self, py: Python<'py>, t: f64) -> PyResult<Bound<'py, PyAny>> {
        let s = self.0.state_at(t).map_err(core_err)?;
        json_to_py(py, &s)
    }
}

/// Solves the auxiliary equation from `t0`. Starts at the instantaneous fixed
/// point unless `rho0` is given.
#[pyfunction]
#[pyo3(signature = (profiles, t0, times, rho0=None, rho_dot0=0.0))]
fn ep_solve(
    profiles: &PyProfiles,
    t0: f64,
    times: Vec<f64>,
    rho0: Option<f64>,
    rho_dot0: f64,
) -> PyResult<PyEpSolution> {
    let initial = initial_data(&profiles.0, t0, rho0, rho_dot0)?;
    ep::ep_solve(&profiles.0, initial, t0, &times, &OdeOptions::default())
        .map(PyEpSolution)
        .map_err(core_err)
}

/// Closed-form eigenvalue of the angular operator.
#[pyfunction]
#[pyo3(signature = (params, eps1, eps2, l, branch=1))]
fn lambda_eigenvalue(params: &PyParams, eps1: i64, eps2: i64, l: f64, branch: i64) -> PyResult<f64> {
    let sector = Sector::new(sign(eps1)?, sign(eps2)?);
    let l = AngularIndex::from_f64(l).map_err(core_err)?;
    angular::lambda_eigenvalue(sector.eps(), l, &params.0, sign(branch)?).map_err(core_err)
}

/// The `count` numerical angular eigenvalues of smallest magnitude in a sector.
#[pyfunction]
#[pyo3(signature = (params, eps1, eps2, count=6, n_theta=256))]
fn angular_spectrum(params: &PyParams, eps1: i64, eps2: i64, count: usize, n_theta: usize) -> PyResult<Vec<f64>> {
    let sector = Sector::new(sign(eps1)?, sign(eps2)?);
    let grid = Arc::new(ThetaGrid::new(n_theta).map_err(core_err)?);
    let pairs = angular::solve_angular_numeric(&params.0, sector, &grid, count).map_err(core_err)?;
    Ok(pairs.into_iter().map(|(lambda, _)| lambda).collect())
}

/// One exact solution, labelled by its quantum numbers.
#[pyclass(name = "Solution", module = "dunkl_pauli", frozen)]
struct PySolution(dunkl_pauli::wavefunction::Solution);

#[pymethods]
impl PySolution {
    #[new]
    #[pyo3(signature = (
        params, n, l, m_s, eps1, eps2, branch=1, *,
        g_s=2.0, charge="negative", basis="coupled", n_theta=256
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        params: &PyParams,
        n: u32,
        l: f64,
        m_s: i64,
        eps1: i64,
        eps2: i64,
        branch: i64,
        g_s: f64,
        charge: &str,
        basis: &str,
        n_theta: usize,
    ) -> PyResult<Self> {
        let charge = match charge {
            "negative" => Charge::Negative,
            "positive" => Charge::Positive,
            other => return Err(PyValueError::new_err(format!("charge must be 'negative' or 'positive', got '{other}'"))),
        };
        let angular = match basis {
            "coupled" => AngularBasis::Coupled,
            "bare" => AngularBasis::Bare,
            other => return Err(PyValueError::new_err(format!("basis must be 'coupled' or 'bare', got '{other}'"))),
        };
        let l = AngularIndex::from_f64(l).map_err(core_err)?;
        let sector = Sector::new(sign(eps1)?, sign(eps2)?);
        let qn = QuantumNumbers::new(n, l, sign(m_s)?, sector, sign(branch)?).map_err(core_err)?;
        let theta = Arc::new(ThetaGrid::new(n_theta).map_err(core_err)?);
        let coupling = Coupling { g_s, charge, angular };
        dunkl_pauli::wavefunction::Solution::new(qn, &params.0, coupling, &theta)
            .map(Self)
            .map_err(core_err)
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.0.lambda
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.0.sigma
    }

    #[getter]
    fn phase_coefficient(&self) -> f64 {
        self.0.phase_coefficient
    }

    #[getter]
    fn invariant_eigenvalue(&self) -> f64 {
        self.0.invariant_eigenvalue()
    }

    fn stationary_energy(&self, mass: f64, omega: f64, omega_c: f64) -> PyResult<f64> {
        self.0.stationary_energy(mass, omega, omega_c).map_err(core_err)
    }

    /// Total phase at `t`.
    fn phase(&self, ep: &PyEpSolution, t: f64) -> PyResult<f64> {
        let state = ep.0.state_at(t).map_err(core_err)?;
        Ok(self.0.phase(&state))
    }

    /// Wavefunction at the polar point `(r, theta)` and time `t`.
    fn evaluate(&self, ep: &PyEpSolution, t: f64, r: f64, theta: f64) -> PyResult<Complex64> {
        let state = ep.0.state_at(t).map_err(core_err)?;
        self.0.evaluate(ep.0.profiles.mass(t), &state, r, theta).map_err(core_err)
    }
}

/// Relative residual of the time-dependent equation at `times`, with observed
/// convergence orders, on the angular grid the solution was built on.
/// Returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (
    solution, profiles, t0, times, *,
    dt=1e-3, n_r=512, tolerance=1e-4, rho0=None, rho_dot0=0.0
))]
#[allow(clippy::too_many_arguments)]
fn pde_residual<'py>(
    py: Python<'py>,
    solution: &PySolution,
    profiles: &PyProfiles,
    t0: f64,
    times: Vec<f64>,
    dt: f64,
    n_r: usize,
    tolerance: f64,
    rho0: Option<f64>,
    rho_dot0: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let initial = initial_data(&profiles.0, t0, rho0, rho_dot0)?;
    let n_theta = solution.0.angular.samples().grid().len();
    let check = PdeCheck { dt, n_r, n_theta, tolerance, mode: SpinTermMode::Grid, r_bounds: None };
    let report = verification::pde_residual(&solution.0, &profiles.0, initial, t0, &times, &check, "python")
        .map_err(core_err)?;
    json_to_py(py, &report)
}

/// Runs a CLI subcommand on a scenario file and returns
/// `{"pass": bool, "files": [...], "lines": [...]}`.
#[pyfunction]
#[pyo3(signature = (subcommand, config, out))]
fn run_scenario<'py>(py: Python<'py>, subcommand: &str, config: PathBuf, out: PathBuf) -> PyResult<Bound<'py, PyDict>> {
    let cmd: dunkl_pauli_cli::Subcommand = subcommand.parse().map_err(PyValueError::new_err)?;
    let scenario = dunkl_pauli_cli::parse_config(&config).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let summary = dunkl_pauli_cli::run(cmd, &scenario, out).map_err(|e| match e.exit_code() {
        2 => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    })?;
    let d = PyDict::new(py);
    d.set_item("pass", summary.pass)?;
    d.set_item("files", summary.files)?;
    d.set_item("lines", summary.lines)?;
    Ok(d)
}

#[pymodule(name = "dunkl_pauli")]
fn py_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyProfiles>()?;
    m.add_class::<PyEpSolution>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(ep_solve, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_eigenvalue, m)?)?;
    m.add_function(wrap_pyfunction!(angular_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(pde_residual, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
