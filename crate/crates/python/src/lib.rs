//! Python bindings for `savwave`.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use savwave::analysis::{l2_error, ErrorReport};
use savwave::cli::exit_code;
use savwave::sav::{max_relative_drift, EnergyRecord};
use savwave::{FeSpace, SavState, Scheme, StepperContext};

fn to_py(err: savwave::Error) -> PyErr {
    if exit_code(&err) == savwave::cli::EXIT_USAGE {
        PyValueError::new_err(err.to_string())
    } else {
        PyRuntimeError::new_err(err.to_string())
    }
}

/// Uniform simplicial mesh of the unit square or cube.
#[pyclass(frozen)]
struct Mesh {
    inner: Arc<savwave::Mesh>,
}

#[pymethods]
impl Mesh {
    #[new]
    fn new(dim: usize, m: usize) -> PyResult<Self> {
        Ok(Self {
            inner: Arc::new(savwave::Mesh::uniform(dim, m).map_err(to_py)?),
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn n_nodes(&self) -> usize {
        self.inner.n_nodes()
    }

    #[getter]
    fn n_elements(&self) -> usize {
        self.inner.n_elements()
    }

    #[getter]
    fn mesh_size(&self) -> f64 {
        self.inner.mesh_size()
    }

    /// Number of degrees of freedom of the Lagrange space of `degree` with
    /// the boundary condition of `problem`.
    fn n_dofs(&self, degree: usize, problem: &Problem) -> PyResult<usize> {
        let space = FeSpace::new(self.inner.clone(), degree, problem.inner.bc).map_err(to_py)?;
        Ok(space.n_dofs())
    }

    fn __repr__(&self) -> String {
        format!(
            "Mesh(dim={}, m={}, elements={})",
            self.inner.dim(),
            self.inner.subdivisions(),
            self.inner.n_elements()
        )
    }
}

/// A catalog problem, looked up by identifier.
#[pyclass(frozen)]
struct Problem {
    inner: savwave::Problem,
}

#[pymethods]
impl Problem {
    #[new]
    fn new(name: &str) -> PyResult<Self> {
        Ok(Self {
            inner: savwave::Problem::by_name(name).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn names() -> Vec<&'static str> {
        savwave::problems::PROBLEM_NAMES.to_vec()
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn c0(&self) -> f64 {
        self.inner.c0
    }

    #[getter]
    fn has_exact(&self) -> bool {
        self.inner.exact.is_some()
    }

    /// The same problem without its source term.
    fn unforced(&self) -> Self {
        Self {
            inner: self.inner.conservation_variant(),
        }
    }

    fn potential(&self, s: f64) -> f64 {
        self.inner.potential(s)
    }

    fn force(&self, s: f64) -> f64 {
        self.inner.force(s)
    }

    fn __repr__(&self) -> String {
        format!("Problem('{}')", self.inner.name)
    }
}

/// A trajectory of one scheme on a fixed mesh and time step.
#[pyclass]
struct Simulation {
    ctx: StepperContext,
    scheme: Scheme,
    state: SavState,
}

#[pymethods]
impl Simulation {
    #[new]
    #[pyo3(signature = (problem, m, tau, degree = 1, scheme = "sav", tol = savwave::DEFAULT_TOL))]
    fn new(problem: &Problem, m: usize, tau: f64, degree: usize, scheme: &str, tol: f64) -> PyResult<Self> {
        let scheme: Scheme = scheme.parse().map_err(to_py)?;
        let p = problem.inner.clone();
        let mesh = Arc::new(savwave::Mesh::uniform(p.dim, m).map_err(to_py)?);
        let space = Arc::new(FeSpace::new(mesh, degree, p.bc).map_err(to_py)?);
        let ctx = StepperContext::new(space, p, tau, tol).map_err(to_py)?;
        let state = ctx.initial_state(scheme).map_err(to_py)?;
        Ok(Self { ctx, scheme, state })
    }

    /// Advances one step.
    fn step(&mut self) -> PyResult<()> {
        self.state = self.ctx.step(self.scheme, &self.state).map_err(to_py)?;
        Ok(())
    }

    /// Advances `n` steps and returns the energy after each one, starting
    /// with the current energy.
    fn run(&mut self, n: usize) -> PyResult<Vec<f64>> {
        let (state, trace) = self
            .ctx
            .run_from(self.scheme, self.state.clone(), n, true)
            .map_err(to_py)?;
        self.state = state;
        Ok(trace.iter().map(|r: &EnergyRecord| r.energy).collect())
    }

    fn energy(&self) -> PyResult<f64> {
        self.ctx.discrete_energy(&self.state).map_err(to_py)
    }

    /// `‖u(t) − u_h‖_{L²}` against the exact solution at the current time.
    fn l2_error(&self) -> PyResult<f64> {
        let exact = self
            .ctx
            .problem()
            .exact
            .as_ref()
            .ok_or_else(|| PyValueError::new_err("problem has no exact solution"))?;
        l2_error(self.ctx.space(), &self.state.u, &exact.at(self.state.time())).map_err(to_py)
    }

    #[getter]
    fn time(&self) -> f64 {
        self.state.time()
    }

    #[getter]
    fn steps_taken(&self) -> usize {
        self.state.step
    }

    #[getter]
    fn r(&self) -> f64 {
        self.state.r
    }

    #[getter]
    fn u(&self) -> Vec<f64> {
        self.state.u.clone()
    }

    #[getter]
    fn v(&self) -> Vec<f64> {
        self.state.v.clone()
    }

    #[getter]
    fn n_dofs(&self) -> usize {
        self.ctx.space().n_dofs()
    }
}

/// One row of a convergence table.
#[pyclass(frozen, get_all)]
struct ErrorRow {
    m: usize,
    n_steps: usize,
    h: f64,
    tau: f64,
    l2_error: f64,
    h1_superclose: f64,
    h1_error: f64,
    l2_order: Option<f64>,
    h1_order: Option<f64>,
    h1_error_order: Option<f64>,
}

impl From<ErrorReport> for ErrorRow {
    fn from(r: ErrorReport) -> Self {
        Self {
            m: r.m,
            n_steps: r.n_steps,
            h: r.h,
            tau: r.tau,
            l2_error: r.l2_error,
            h1_superclose: r.h1_superclose,
            h1_error: r.h1_error,
            l2_order: r.l2_order,
            h1_order: r.h1_order,
            h1_error_order: r.h1_error_order,
        }
    }
}

#[pymethods]
impl ErrorRow {
    fn __repr__(&self) -> String {
        format!("ErrorRow(m={}, n={}, l2_error={:.4e})", self.m, self.n_steps, self.l2_error)
    }
}

/// Convergence study of the SAV scheme over increasing `M`.
#[pyfunction]
#[pyo3(signature = (problem, m_list, degree = 1, n_rule = "eq-m", t_final = 1.0, tol = savwave::DEFAULT_TOL))]
fn convergence_study(
    problem: &Problem,
    m_list: Vec<usize>,
    degree: usize,
    n_rule: &str,
    t_final: f64,
    tol: f64,
) -> PyResult<Vec<ErrorRow>> {
    let rule: savwave::NRule = n_rule.parse().map_err(to_py)?;
    let rows = savwave::convergence_study(&problem.inner, degree, &m_list, rule, t_final, tol).map_err(to_py)?;
    Ok(rows.into_iter().map(ErrorRow::from).collect())
}

#[pyfunction]
fn convergence_order(coarse_err: f64, fine_err: f64, ratio: f64) -> PyResult<f64> {
    savwave::convergence_order(coarse_err, fine_err, ratio).map_err(to_py)
}

/// Largest `|Eⁿ − E⁰| / E⁰` over a list of energies.
#[pyfunction]
fn relative_drift(energies: Vec<f64>) -> f64 {
    let trace: Vec<EnergyRecord> = energies
        .iter()
        .enumerate()
        .map(|(step, &energy)| EnergyRecord {
            step,
            time: 0.0,
            energy,
        })
        .collect();
    max_relative_drift(&trace)
}

#[pymodule]
fn savwave_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Mesh>()?;
    m.add_class::<Problem>()?;
    m.add_class::<Simulation>()?;
    m.add_class::<ErrorRow>()?;
    m.add_function(wrap_pyfunction!(convergence_study, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_order, m)?)?;
    m.add_function(wrap_pyfunction!(relative_drift, m)?)?;
    Ok(())
}
