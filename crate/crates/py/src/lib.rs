//! Python bindings: meshes, kernels, the stepping solver and the studies.

use std::fs::File;
use std::io::{BufReader, BufWriter};

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use tfmbe::harness::{self, CoarseningSpec};
use tfmbe::kernels::{identity_report, step_bounds};
use tfmbe::stepper::{self, AdaptiveConfig, MeshPlan, StepBoundMode, StepReport};
use tfmbe::{timemesh, Error, SpectralGrid};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NoConvergence { .. } | Error::StepBound { .. } | Error::Io(_) | Error::Checkpoint(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        other => PyValueError::new_err(other.to_string()),
    }
}

fn report_dict<'py>(py: Python<'py>, r: &StepReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("n", r.n)?;
    d.set_item("t", r.t)?;
    d.set_item("tau", r.tau)?;
    d.set_item("energy", r.energy)?;
    d.set_item("variational", r.variational)?;
    d.set_item("volume", r.volume)?;
    d.set_item("l2_norm", r.l2_norm)?;
    d.set_item("l2_margin", r.l2_margin)?;
    d.set_item("fp_iters", r.fp_iters)?;
    d.set_item("residual", r.residual)?;
    d.set_item("rate", r.rate)?;
    Ok(d)
}

#[pyclass(name = "TimeMesh", module = "tfmbe_py", from_py_object)]
#[derive(Clone)]
struct PyTimeMesh(tfmbe::TimeMesh);

#[pymethods]
impl PyTimeMesh {
    #[new]
    fn new(points: Vec<f64>) -> PyResult<Self> {
        tfmbe::TimeMesh::from_points(points).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn uniform(n: usize, t_end: f64) -> PyResult<Self> {
        timemesh::build_uniform(n, t_end).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn graded(n: usize, gamma: f64, t_end: f64) -> PyResult<Self> {
        timemesh::build_graded(n, gamma, t_end).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn random(n: usize, t_end: f64, seed: u64) -> PyResult<Self> {
        timemesh::build_random(n, t_end, seed).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn graded_random(n: usize, gamma: f64, t_end: f64, seed: u64) -> PyResult<Self> {
        timemesh::build_graded_random(n, gamma, t_end, seed).map(Self).map_err(to_py)
    }

    fn points(&self) -> Vec<f64> {
        self.0.points().to_vec()
    }

    fn steps(&self) -> Vec<f64> {
        self.0.steps()
    }

    fn tau(&self, k: usize) -> PyResult<f64> {
        if k == 0 || k > self.0.len() {
            return Err(PyValueError::new_err(format!("step index {k} outside 1..={}", self.0.len())));
        }
        Ok(self.0.tau(k))
    }

    #[getter]
    fn end_time(&self) -> f64 {
        self.0.end_time()
    }

    fn max_step(&self) -> f64 {
        self.0.max_step()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("TimeMesh(N={}, T={})", self.0.len(), self.0.end_time())
    }
}

#[pyclass(name = "KernelSet", module = "tfmbe_py")]
struct PyKernelSet(tfmbe::KernelSet);

#[pymethods]
impl PyKernelSet {
    #[new]
    fn new(alpha: f64, mesh: &PyTimeMesh) -> PyResult<Self> {
        tfmbe::KernelSet::build(alpha, mesh.0.clone()).map(Self).map_err(to_py)
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha()
    }

    #[getter]
    fn levels(&self) -> usize {
        self.0.levels()
    }

    /// L1 weights `a^{(n)}_0, ..., a^{(n)}_{n-1}`.
    fn a_row(&self, n: usize) -> PyResult<Vec<f64>> {
        self.0.a_row(n).map(<[f64]>::to_vec).map_err(to_py)
    }

    fn theta_row(&self, n: usize) -> PyResult<Vec<f64>> {
        self.0.theta_row(n).map(<[f64]>::to_vec).map_err(to_py)
    }

    fn dcc_row(&self, n: usize) -> PyResult<Vec<f64>> {
        self.0.dcc_row_at(n).map_err(to_py)
    }

    fn identity_report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = identity_report(&self.0);
        let d = PyDict::new(py);
        d.set_item("orthogonality", r.orthogonality)?;
        d.set_item("complementarity", r.complementarity)?;
        d.set_item("min_dcc", r.min_dcc)?;
        d.set_item("sum_bound_margin", r.sum_bound_margin)?;
        d.set_item("max_decay_ratio", r.max_decay_ratio)?;
        Ok(d)
    }
}

fn solver_config(
    scheme: &str,
    step_bound: &str,
    fp_tol: f64,
    adaptive: Option<(f64, f64, f64)>,
) -> PyResult<tfmbe::SolverConfig> {
    let adaptive = adaptive
        .map(|(lo, hi, eta)| AdaptiveConfig::new(lo, hi, eta))
        .transpose()
        .map_err(to_py)?;
    Ok(tfmbe::SolverConfig {
        scheme: scheme.parse().map_err(to_py)?,
        enforce_step_bound: step_bound.parse::<StepBoundMode>().map_err(to_py)?,
        fp_tol,
        adaptive,
        ..tfmbe::SolverConfig::default()
    })
}

/// Unforced solver on the `2π`-periodic square. `adaptive` is
/// `(tau_min, tau_max, eta)` and is needed by `run_adaptive`.
#[pyclass(name = "Solver", module = "tfmbe_py")]
struct PySolver(stepper::Solver);

#[pymethods]
impl PySolver {
    #[new]
    #[pyo3(signature = (m, alpha, eps2 = 0.1, kappa = 1.0, phi0 = None, scheme = "l1", step_bound = "off", fp_tol = 1e-12, adaptive = None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        m: usize,
        alpha: f64,
        eps2: f64,
        kappa: f64,
        phi0: Option<Vec<f64>>,
        scheme: &str,
        step_bound: &str,
        fp_tol: f64,
        adaptive: Option<(f64, f64, f64)>,
    ) -> PyResult<Self> {
        let grid = SpectralGrid::periodic_2pi(m).map_err(to_py)?;
        let phi0 = match phi0 {
            Some(v) => grid.field_from(v),
            None => harness::coarsening_initial(&grid),
        }
        .map_err(to_py)?;
        let params = tfmbe::ModelParams::new(eps2, kappa, alpha).map_err(to_py)?;
        let cfg = solver_config(scheme, step_bound, fp_tol, adaptive)?;
        stepper::Solver::new(grid, params, cfg, phi0, None).map(Self).map_err(to_py)
    }

    /// Restores a checkpoint written by `save_checkpoint`.
    #[staticmethod]
    #[pyo3(signature = (path, scheme = "l1", step_bound = "off", fp_tol = 1e-12, adaptive = None))]
    fn resume(
        path: &str,
        scheme: &str,
        step_bound: &str,
        fp_tol: f64,
        adaptive: Option<(f64, f64, f64)>,
    ) -> PyResult<Self> {
        let cfg = solver_config(scheme, step_bound, fp_tol, adaptive)?;
        let file = File::open(path).map_err(|e| to_py(e.into()))?;
        stepper::Solver::resume(BufReader::new(file), cfg, None)
            .map(Self)
            .map_err(to_py)
    }

    fn save_checkpoint(&self, path: &str) -> PyResult<()> {
        let file = File::create(path).map_err(|e| to_py(e.into()))?;
        self.0.write_checkpoint(BufWriter::new(file)).map_err(to_py)
    }

    #[getter]
    fn level(&self) -> usize {
        self.0.level()
    }

    #[getter]
    fn time(&self) -> f64 {
        self.0.time()
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.grid().m()
    }

    /// Current solution, row-major.
    fn phi(&self) -> Vec<f64> {
        self.0.phi().values().to_vec()
    }

    fn mesh(&self) -> PyTimeMesh {
        PyTimeMesh(self.0.mesh().clone())
    }

    fn report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = self.0.current_report().map_err(to_py)?;
        report_dict(py, &r)
    }

    fn advance<'py>(&mut self, py: Python<'py>, tau: f64) -> PyResult<Bound<'py, PyDict>> {
        let r = self.0.advance(tau).map_err(to_py)?;
        report_dict(py, &r)
    }

    /// Follows `mesh` from the current level; returns one report per new level.
    fn run_mesh<'py>(&mut self, py: Python<'py>, mesh: &PyTimeMesh) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let plan = MeshPlan::Fixed(mesh.0.clone());
        self.run_plan(py, &plan)
    }

    fn run_adaptive<'py>(&mut self, py: Python<'py>, t_end: f64) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.run_plan(py, &MeshPlan::Adaptive { t_end })
    }
}

impl PySolver {
    fn run_plan<'py>(&mut self, py: Python<'py>, plan: &MeshPlan) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let out = stepper::run(&mut self.0, plan, |_, _| {}).map_err(to_py)?;
        if let Some(e) = out.failure {
            return Err(to_py(e));
        }
        out.steps.iter().map(|r| report_dict(py, r)).collect()
    }
}

/// `(convergence, solvability)` step bounds.
#[pyfunction]
#[pyo3(name = "step_bounds")]
fn py_step_bounds(alpha: f64, eps2: f64, kappa: f64) -> PyResult<(f64, f64)> {
    let b = step_bounds(alpha, eps2, kappa).map_err(to_py)?;
    Ok((b.convergence, b.solvability))
}

/// Kernel identities on a mesh of the given kind over `[0, 1]`.
#[pyfunction]
#[pyo3(signature = (alpha, mesh = "uniform", n = 50, gamma = 1.0, seed = 0))]
fn kernel_audit<'py>(
    py: Python<'py>,
    alpha: f64,
    mesh: &str,
    n: usize,
    gamma: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let kind = mesh.parse().map_err(to_py)?;
    let mesh = harness::audit_mesh(kind, n, gamma, seed).map_err(to_py)?;
    let ks = tfmbe::KernelSet::build(alpha, mesh).map_err(to_py)?;
    PyKernelSet(ks).identity_report(py)
}

/// Manufactured-solution study on graded+random meshes. One dict per
/// `(gamma, N)` cell with keys `gamma, n, tau_max, e_n, order, failure`.
#[pyfunction]
#[pyo3(signature = (alpha, gammas, ns, m = 32, seed = 0))]
fn convergence_study<'py>(
    py: Python<'py>,
    alpha: f64,
    gammas: Vec<f64>,
    ns: Vec<usize>,
    m: usize,
    seed: u64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let tables = py
        .detach(|| harness::convergence_study(alpha, &gammas, &ns, m, seed, &tfmbe::SolverConfig::default()))
        .map_err(to_py)?;
    let mut out = Vec::new();
    for table in &tables {
        for row in &table.rows {
            let d = PyDict::new(py);
            d.set_item("gamma", table.gamma)?;
            d.set_item("n", row.n)?;
            d.set_item("tau_max", row.tau_max)?;
            d.set_item("e_n", row.e_n)?;
            d.set_item("order", row.order)?;
            d.set_item("failure", row.failure.clone())?;
            out.push(d);
        }
    }
    Ok(out)
}

/// Coarsening benchmark run. Returns `reports` (initial state first),
/// `snapshots` as `(t, field)` pairs and `violations`.
#[pyfunction]
#[pyo3(signature = (alpha, t_end, m = 64, eta = 1e3, scheme = "l1", uniform_step = None, snapshots = Vec::new()))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    alpha: f64,
    t_end: f64,
    m: usize,
    eta: f64,
    scheme: &str,
    uniform_step: Option<f64>,
    snapshots: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut spec = CoarseningSpec::benchmark(alpha, eta, m, t_end).map_err(to_py)?;
    spec.cfg.scheme = scheme.parse().map_err(to_py)?;
    spec.uniform_step = uniform_step;
    spec.snapshot_times = snapshots;
    let out = py.detach(|| harness::coarsening_run(&spec)).map_err(to_py)?;
    if let Some(e) = out.failure {
        return Err(to_py(e));
    }
    let area = out.solver.grid().area();
    let violations = harness::check_invariants(&out.record, area, harness::InvariantChecks::for_config(&spec.cfg));
    let d = PyDict::new(py);
    let rows: Vec<Bound<'py, PyDict>> = out
        .record
        .rows
        .iter()
        .map(|r| {
            let row = PyDict::new(py);
            row.set_item("n", r.n)?;
            row.set_item("t", r.t_n)?;
            row.set_item("tau", r.tau_n)?;
            row.set_item("energy", r.energy)?;
            row.set_item("variational", r.e_alpha)?;
            row.set_item("volume", r.volume)?;
            row.set_item("l2_norm", r.l2_norm)?;
            row.set_item("l2_margin", r.l2_margin)?;
            row.set_item("fp_iters", r.fp_iters)?;
            Ok(row)
        })
        .collect::<PyResult<_>>()?;
    d.set_item("reports", rows)?;
    let snaps: Vec<(f64, Vec<f64>)> = out.snapshots.iter().map(|s| (s.t, s.field.values().to_vec())).collect();
    d.set_item("snapshots", snaps)?;
    d.set_item("violations", violations)?;
    Ok(d)
}

#[pymodule]
fn tfmbe_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTimeMesh>()?;
    m.add_class::<PyKernelSet>()?;
    m.add_class::<PySolver>()?;
    m.add_function(wrap_pyfunction!(py_step_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_audit, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_study, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
