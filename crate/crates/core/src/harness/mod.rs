//! Experiment drivers: manufactured-solution convergence studies, coarsening
//! runs, kernel audits, consistency-bound profiles and invariant checks.

pub mod config;
mod record;

pub use record::{Format, RunMetadata, RunRecord, RunRow, COLUMNS};

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{consistency_bounds, gamma, identity_report, omega, IdentityReport, KernelSet};
use crate::model::{self, ModelParams};
use crate::spectral::{Field, SpectralGrid};
use crate::stepper::{adaptive_prefix, run, Forcing, MeshPlan, Scheme, Solver, SolverConfig, StepBoundMode};
use crate::timemesh::{build_graded, build_graded_random, build_random, build_uniform, TimeMesh};

/// `log(e(N)/e(2N)) / log(τ(N)/τ(2N))` for any two consecutive rows.
pub fn order(e_coarse: f64, e_fine: f64, tau_coarse: f64, tau_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (tau_coarse / tau_fine).ln()
}

/// `Φ = ω_{1+α}(t) sin x sin y` on `(0, 2π)²` with `κ = 1`, `ε = 0.5`,
/// forced so that it solves the semi-discrete problem exactly.
#[derive(Clone, Debug)]
pub struct ManufacturedProblem {
    pub grid: SpectralGrid,
    pub params: ModelParams,
    pub linear_only: bool,
}

impl ManufacturedProblem {
    pub fn new(alpha: f64, m: usize) -> Result<Self> {
        Ok(Self {
            grid: SpectralGrid::periodic_2pi(m)?,
            params: ModelParams::new(0.25, 1.0, alpha)?,
            linear_only: false,
        })
    }

    pub fn exact(&self, t: f64) -> Field {
        let w = omega(1.0 + self.params.alpha, t);
        self.grid
            .project(|x, y| w * x.sin() * y.sin())
            .expect("finite manufactured solution")
    }

    /// `g = ∂_t^α Φ + κ μ_h(Φ)` with `∂_t^α Φ = sin x sin y`.
    pub fn forcing(&self) -> Forcing {
        let params = self.params;
        let linear = self.linear_only;
        let this = self.clone();
        std::sync::Arc::new(move |grid: &SpectralGrid, t: f64| {
            let phi = this.exact(t);
            let mu = if linear {
                grid.bilaplacian(&phi).scaled(params.eps2)
            } else {
                model::chemical_potential(grid, &phi, &params).expect("grid-consistent field")
            };
            let mut g = grid.project(|x, y| x.sin() * y.sin()).expect("finite");
            g.axpy(params.kappa, &mu);
            g
        })
    }

    /// Runs the forced problem along `mesh`, tracking `e(N) = max_n ‖Φ(t_n) - φⁿ‖`.
    pub fn solve(&self, mesh: &TimeMesh, cfg: &SolverConfig) -> Result<ManufacturedRun> {
        let cfg = SolverConfig {
            linear_only: self.linear_only,
            ..*cfg
        };
        let mut solver = Solver::new(
            self.grid.clone(),
            self.params,
            cfg,
            self.exact(0.0),
            Some(self.forcing()),
        )?;
        let mut err: f64 = 0.0;
        let out = run(&mut solver, &MeshPlan::Fixed(mesh.clone()), |s, rep| {
            err = err.max(s.grid().norm(&s.phi().sub(&self.exact(rep.t))));
        })?;
        if let Some(e) = out.failure {
            return Err(e);
        }
        let mut record = RunRecord::default();
        record.push(&out.initial);
        for rep in &out.steps {
            record.push(rep);
        }
        let checks = InvariantChecks {
            volume: true,
            l2_margin: true,
            energy_decay: false,
        };
        let violations = check_invariants(&record, self.grid.area(), checks);
        Ok(ManufacturedRun {
            max_error: err,
            record,
            violations,
        })
    }

    pub fn max_error(&self, mesh: &TimeMesh, cfg: &SolverConfig) -> Result<f64> {
        Ok(self.solve(mesh, cfg)?.max_error)
    }
}

pub struct ManufacturedRun {
    pub max_error: f64,
    pub record: RunRecord,
    /// Volume and L² bound violations along the run.
    pub violations: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub tau_max: f64,
    /// `None` when the cell failed; see `failure`.
    pub e_n: Option<f64>,
    /// Order against the previous row.
    pub order: Option<f64>,
    pub failure: Option<String>,
    /// Volume and L² bound violations seen in this cell.
    pub violations: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub alpha: f64,
    pub gamma: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Order at the finest pair of rows.
    pub fn finest_order(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.order)
    }
}

fn fill_orders(rows: &mut [ConvergenceRow]) {
    for i in 1..rows.len() {
        rows[i].order = match (rows[i - 1].e_n, rows[i].e_n) {
            (Some(a), Some(b)) => Some(order(a, b, rows[i - 1].tau_max, rows[i].tau_max)),
            _ => None,
        };
    }
}

/// Errors and orders of the L1 scheme on seeded graded+random meshes over
/// `[0, 1]`, one table per `γ`. Cells run in parallel.
pub fn convergence_study(
    alpha: f64,
    gammas: &[f64],
    ns: &[usize],
    m: usize,
    seed: u64,
    cfg: &SolverConfig,
) -> Result<Vec<ConvergenceTable>> {
    let problem = ManufacturedProblem::new(alpha, m)?;
    let cells: Vec<(usize, usize)> = (0..gammas.len())
        .flat_map(|g| (0..ns.len()).map(move |k| (g, k)))
        .collect();
    let results: Vec<((usize, usize), ConvergenceRow)> = cells
        .par_iter()
        .map(|&(g, k)| {
            let n = ns[k];
            let row = match build_graded_random(n, gammas[g], 1.0, seed) {
                Ok(mesh) => {
                    let tau_max = mesh.max_step();
                    match problem.solve(&mesh, cfg) {
                        Ok(run) => ConvergenceRow {
                            n,
                            tau_max,
                            e_n: Some(run.max_error),
                            order: None,
                            failure: None,
                            violations: run.violations,
                        },
                        Err(e) => failed_row(n, tau_max, e),
                    }
                }
                Err(e) => failed_row(n, f64::NAN, e),
            };
            ((g, k), row)
        })
        .collect();
    let mut tables: Vec<ConvergenceTable> = gammas
        .iter()
        .map(|&gamma| ConvergenceTable {
            alpha,
            gamma,
            rows: Vec::with_capacity(ns.len()),
        })
        .collect();
    let mut sorted = results;
    sorted.sort_by_key(|&(key, _)| key);
    for ((g, _), row) in sorted {
        tables[g].rows.push(row);
    }
    for t in &mut tables {
        fill_orders(&mut t.rows);
    }
    Ok(tables)
}

fn failed_row(n: usize, tau_max: f64, e: Error) -> ConvergenceRow {
    ConvergenceRow {
        n,
        tau_max,
        e_n: None,
        order: None,
        failure: Some(e.to_string()),
        violations: Vec::new(),
    }
}

/// Writes `alpha,gamma,N,tau_max,eN,order,status` rows.
pub fn write_convergence_csv<W: Write>(tables: &[ConvergenceTable], mut out: W) -> Result<()> {
    writeln!(out, "alpha,gamma,N,tau_max,eN,order,status")?;
    for t in tables {
        for r in &t.rows {
            let e = r.e_n.map_or_else(String::new, |v| v.to_string());
            let o = r.order.map_or_else(String::new, |v| v.to_string());
            let status = r.failure.as_deref().unwrap_or("ok").replace(',', ";");
            writeln!(out, "{},{},{},{},{e},{o},{status}", t.alpha, t.gamma, r.n, r.tau_max)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_convergence_json<W: Write>(tables: &[ConvergenceTable], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, tables)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// `|v_tt|` for `v = ω_{1+α}(t)`.
pub fn omega_vtt(alpha: f64) -> impl Fn(f64) -> f64 {
    let c = (1.0 - alpha) / gamma(alpha);
    move |t: f64| c * t.powf(alpha - 2.0)
}

/// Maximal consistency bound of `v = ω_{1+α}` over the levels of pure graded
/// meshes on `[0, 1]`, with the orders between consecutive `N`.
pub fn consistency_study(alpha: f64, gamma_exp: f64, ns: &[usize]) -> Result<Vec<ConvergenceRow>> {
    let mut rows = ns
        .par_iter()
        .map(|&n| {
            let mesh = build_graded(n, gamma_exp, 1.0)?;
            let tau_max = mesh.max_step();
            let ks = KernelSet::build(alpha, mesh)?;
            let bound = consistency_bounds(&ks, omega_vtt(alpha))?
                .into_iter()
                .fold(0.0, f64::max);
            Ok(ConvergenceRow {
                n,
                tau_max,
                e_n: Some(bound),
                order: None,
                failure: None,
                violations: Vec::new(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    fill_orders(&mut rows);
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshKind {
    Uniform,
    Graded,
    Random,
}

impl std::str::FromStr for MeshKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(MeshKind::Uniform),
            "graded" => Ok(MeshKind::Graded),
            "random" => Ok(MeshKind::Random),
            other => Err(Error::InvalidArgument(format!("unknown mesh kind {other:?}"))),
        }
    }
}

/// Meshes on `[0, 1]` for kernel audits.
pub fn audit_mesh(kind: MeshKind, n: usize, gamma_exp: f64, seed: u64) -> Result<TimeMesh> {
    match kind {
        MeshKind::Uniform => build_uniform(n, 1.0),
        MeshKind::Graded => build_graded(n, gamma_exp, 1.0),
        MeshKind::Random => build_random(n, 1.0, seed),
    }
}

pub fn kernel_audit(alpha: f64, mesh: TimeMesh) -> Result<IdentityReport> {
    Ok(identity_report(&KernelSet::build(alpha, mesh)?))
}

/// `0.1 (sin 3x sin 2y + sin 5x sin 5y)`.
pub fn coarsening_initial(grid: &SpectralGrid) -> Result<Field> {
    grid.project(|x, y| 0.1 * ((3.0 * x).sin() * (2.0 * y).sin() + (5.0 * x).sin() * (5.0 * y).sin()))
}

/// Uniform reference mesh with step about `tau` on `[0, T]`. With an adaptive
/// configuration the same graded cell as the adaptive run comes first and
/// `[T0, T]` is split into `⌈(T - T0)/tau⌉` equal steps.
pub fn reference_mesh(cfg: &SolverConfig, params: &ModelParams, t_end: f64, tau: f64) -> Result<TimeMesh> {
    if !(tau > 0.0) || !(t_end > 0.0) {
        return Err(Error::InvalidArgument(format!("need T > 0 and tau > 0, got {t_end}, {tau}")));
    }
    let (mut points, t0) = match cfg.adaptive {
        Some(_) => {
            let prefix = adaptive_prefix(cfg, params)?;
            if prefix.t0 >= t_end {
                return Err(Error::InvalidArgument(format!(
                    "graded cell end {} must precede the final time {t_end}",
                    prefix.t0
                )));
            }
            (prefix.points(), prefix.t0)
        }
        None => (vec![0.0], 0.0),
    };
    let n = ((t_end - t0) / tau * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let h = (t_end - t0) / n as f64;
    points.extend((1..n).map(|k| t0 + k as f64 * h));
    points.push(t_end);
    TimeMesh::from_points(points)
}

#[derive(Clone, Debug)]
pub struct CoarseningSpec {
    pub params: ModelParams,
    pub m: usize,
    pub t_end: f64,
    pub cfg: SolverConfig,
    /// Fixed uniform step; adaptive stepping per `cfg.adaptive` otherwise.
    pub uniform_step: Option<f64>,
    pub snapshot_times: Vec<f64>,
}

impl CoarseningSpec {
    /// Benchmark defaults: `κ = 1`, `ε² = 0.1`, `τ ∈ [1e-3, 0.1]`,
    /// solvability-bound enforcement.
    pub fn benchmark(alpha: f64, eta: f64, m: usize, t_end: f64) -> Result<Self> {
        Ok(Self {
            params: ModelParams::new(0.1, 1.0, alpha)?,
            m,
            t_end,
            cfg: SolverConfig {
                enforce_step_bound: StepBoundMode::Solvability,
                adaptive: Some(crate::stepper::AdaptiveConfig::new(1e-3, 0.1, eta)?),
                ..SolverConfig::default()
            },
            uniform_step: None,
            snapshot_times: Vec::new(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub requested: f64,
    pub n: usize,
    pub t: f64,
    /// Step adjacent to the chosen level.
    pub tau_local: f64,
    pub field: Field,
}

pub struct CoarseningOutput {
    pub record: RunRecord,
    pub snapshots: Vec<Snapshot>,
    /// `‖∂_τ φⁿ‖` per step.
    pub rates: Vec<f64>,
    /// Final state, e.g. for checkpointing.
    pub solver: Solver,
    pub failure: Option<Error>,
}

/// Unforced run from [`coarsening_initial`], recording every level and the
/// solution at the level nearest each requested time.
pub fn coarsening_run(spec: &CoarseningSpec) -> Result<CoarseningOutput> {
    let grid = SpectralGrid::periodic_2pi(spec.m)?;
    let phi0 = coarsening_initial(&grid)?;
    let solver = Solver::new(grid, spec.params, spec.cfg, phi0, None)?;
    coarsening_continue(spec, solver)
}

/// Continues `solver` (fresh or resumed from a checkpoint) up to `spec.t_end`.
/// Snapshot times before the solver's current time are skipped.
pub fn coarsening_continue(spec: &CoarseningSpec, mut solver: Solver) -> Result<CoarseningOutput> {
    let start = Instant::now();
    if solver.grid().m() != spec.m || solver.params() != &spec.params {
        return Err(Error::InvalidArgument("solver does not match the run specification".into()));
    }
    let phi0 = solver.phi().clone();
    let t_start = solver.time();
    let plan = match spec.uniform_step {
        Some(tau) => MeshPlan::Fixed(reference_mesh(&spec.cfg, &spec.params, spec.t_end, tau)?),
        None => MeshPlan::Adaptive { t_end: spec.t_end },
    };
    let mut requested: Vec<f64> = spec.snapshot_times.iter().copied().filter(|&t| t >= t_start).collect();
    requested.sort_by(f64::total_cmp);
    let mut snapshots = Vec::new();
    let mut rates = Vec::new();
    let mut next = 0;
    while next < requested.len() && requested[next] <= t_start {
        snapshots.push(Snapshot {
            requested: requested[next],
            n: solver.level(),
            t: t_start,
            tau_local: 0.0,
            field: phi0.clone(),
        });
        next += 1;
    }
    let outcome = run(&mut solver, &plan, |s, rep| {
        rates.push(rep.rate);
        while next < requested.len() && requested[next] <= rep.t {
            let want = requested[next];
            let t_prev = rep.t - rep.tau;
            let (n, t, field) = if want - t_prev < rep.t - want {
                let h = s.history();
                (rep.n - 1, t_prev, h.phi_prev.sub(&h.increments[rep.n - 1]))
            } else {
                (rep.n, rep.t, s.phi().clone())
            };
            snapshots.push(Snapshot {
                requested: want,
                n,
                t,
                tau_local: rep.tau,
                field,
            });
            next += 1;
        }
    })?;
    let mut meta = RunMetadata {
        alpha: spec.params.alpha,
        eps2: spec.params.eps2,
        kappa: spec.params.kappa,
        scheme: spec.cfg.scheme.name().to_string(),
        mesh: match (&spec.uniform_step, &spec.cfg.adaptive) {
            (Some(tau), _) => format!("uniform tau={tau}"),
            (None, Some(a)) => format!(
                "graded T0={} then adaptive tau_min={} tau_max={} eta={}",
                a.graded_t0, a.tau_min, a.tau_max, a.eta
            ),
            (None, None) => "adaptive".to_string(),
        },
        seed: None,
        ..Default::default()
    };
    meta.extra.insert("grid".into(), spec.m.to_string());
    meta.extra.insert("T".into(), spec.t_end.to_string());
    if let Some(e) = &outcome.failure {
        meta.extra.insert("failure".into(), e.to_string().replace('\n', " "));
    }
    if t_start > 0.0 {
        meta.extra.insert("resumed_at".into(), t_start.to_string());
    }
    let mut record = RunRecord::new(meta);
    record.push(&outcome.initial);
    for rep in &outcome.steps {
        record.push(rep);
    }
    record.metadata.wall_time = start.elapsed().as_secs_f64();
    Ok(CoarseningOutput {
        record,
        snapshots,
        rates,
        solver,
        failure: outcome.failure,
    })
}

/// Which per-step invariants a record must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InvariantChecks {
    pub volume: bool,
    pub l2_margin: bool,
    pub energy_decay: bool,
}

impl InvariantChecks {
    /// Volume always; the L² bound and `𝓔_α` decay for the fully implicit
    /// schemes, the latter only under solvability-bound enforcement.
    pub fn for_config(cfg: &SolverConfig) -> Self {
        let implicit = cfg.scheme != Scheme::ConvexSplitting;
        Self {
            volume: true,
            l2_margin: implicit,
            energy_decay: implicit && cfg.enforce_step_bound == StepBoundMode::Solvability,
        }
    }
}

/// Violations of volume conservation (`1e-9 |Ω|`), the L² bound
/// (margin ≥ `-1e-8`) and `𝓔_α` decay (`1e-9` relative slack).
pub fn check_invariants(record: &RunRecord, area: f64, checks: InvariantChecks) -> Vec<String> {
    let mut out = Vec::new();
    let Some(first) = record.rows.first() else {
        return out;
    };
    for pair in record.rows.windows(2) {
        let (prev, r) = (&pair[0], &pair[1]);
        if checks.volume && (r.volume - first.volume).abs() > 1e-9 * area {
            out.push(format!("volume drift {:e} at n={}", r.volume - first.volume, r.n));
        }
        if checks.l2_margin && r.l2_margin < -1e-8 {
            out.push(format!("L2 margin {:e} at n={}", r.l2_margin, r.n));
        }
        if checks.energy_decay && r.e_alpha > prev.e_alpha + 1e-9 * prev.e_alpha.abs() {
            out.push(format!(
                "variational energy increased by {:e} at n={}",
                r.e_alpha - prev.e_alpha,
                r.n
            ));
        }
    }
    out
}
