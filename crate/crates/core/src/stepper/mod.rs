//! Time stepping for `(∂_τ^α φ)^n = -κ μ^n + g^n`.
//!
//! Each level is a nonlinear equation
//!
//! ```text
//! a₀ (φ - φ^{n-1}) + 𝓛^{n-1} + κ [ε² Δ_h² φ - ∇_h·(|∇_h φ|² ∇_h φ) + ∇_h·∇_h ψ] = g,
//! ```
//!
//! with `ψ = φ` for the fully implicit schemes and `ψ = φ^{n-1}` for convex
//! splitting, and `𝓛^{n-1} = Σ_{k<n} a^{(n)}_{n-k} ∇_τ φ^k` the history term.
//! It is solved by a Picard iteration whose linear part is diagonal in
//! Fourier space:
//!
//! ```text
//! P φ̂^{s+1} = a₀ φ̂^{n-1} - 𝓛̂ + ĝ + κ ∇·(|∇φ^s|²∇φ^s)^ + κ S σ φ̂^s [+ κ σ φ̂^{n-1}],
//! P = a₀ + κ ε² λ² + κ (S - c) σ,
//! ```
//!
//! where `λ = ν²(m² + n²)`, `σ` is the symbol of `-∇_h·∇_h`, `c` is 1 when the
//! concave part is implicit and 0 otherwise, and `S = 1.5 max|∇φ^s|²`
//! (at least `c`) centres the stabilization in the spectrum of the cubic
//! term's Jacobian. The stabilization cancels at the fixed point.

mod checkpoint;

pub use checkpoint::CHECKPOINT_VERSION;

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{step_bounds, Combination, KernelSet};
use crate::model::{self, ModelParams};
use crate::spectral::{Field, SpectralGrid, Spectrum};
use crate::timemesh::{GradedSpec, TimeMesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    L1Implicit,
    ConvexSplitting,
    BackwardEuler,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::L1Implicit => "l1",
            Scheme::ConvexSplitting => "splitting",
            Scheme::BackwardEuler => "euler",
        }
    }

    fn tag(self) -> u8 {
        match self {
            Scheme::L1Implicit => 0,
            Scheme::ConvexSplitting => 1,
            Scheme::BackwardEuler => 2,
        }
    }

    fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Scheme::L1Implicit),
            1 => Some(Scheme::ConvexSplitting),
            2 => Some(Scheme::BackwardEuler),
            _ => None,
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" | "l1_implicit" => Ok(Scheme::L1Implicit),
            "splitting" | "convex_splitting" => Ok(Scheme::ConvexSplitting),
            "euler" | "backward_euler" => Ok(Scheme::BackwardEuler),
            other => Err(Error::InvalidArgument(format!("unknown scheme {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepBoundMode {
    Off,
    Convergence,
    Solvability,
}

impl std::str::FromStr for StepBoundMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "off" => Ok(StepBoundMode::Off),
            "convergence" => Ok(StepBoundMode::Convergence),
            "solvability" => Ok(StepBoundMode::Solvability),
            other => Err(Error::InvalidArgument(format!("unknown step-bound mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveConfig {
    pub tau_min: f64,
    pub tau_max: f64,
    pub eta: f64,
    /// End of the graded initial cell.
    pub graded_t0: f64,
}

impl AdaptiveConfig {
    pub fn new(tau_min: f64, tau_max: f64, eta: f64) -> Result<Self> {
        let cfg = Self {
            tau_min,
            tau_max,
            eta,
            graded_t0: 0.01,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(self.tau_min > 0.0) || !(self.tau_min <= self.tau_max) || !(self.eta >= 0.0) || !(self.graded_t0 > 0.0) {
            return Err(Error::InvalidArgument(format!("inconsistent adaptive settings {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Stop once successive iterates differ by at most this in discrete L².
    pub fp_tol: f64,
    pub fp_max_iters: usize,
    pub scheme: Scheme,
    pub enforce_step_bound: StepBoundMode,
    pub adaptive: Option<AdaptiveConfig>,
    /// Drop the slope-selection flux entirely (linear test problem).
    pub linear_only: bool,
    /// Apply the 2/3 rule to the nonlinear term.
    pub dealias: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            fp_tol: 1e-12,
            fp_max_iters: 500,
            scheme: Scheme::L1Implicit,
            enforce_step_bound: StepBoundMode::Off,
            adaptive: None,
            linear_only: false,
            dealias: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fp_tol > 0.0) || self.fp_max_iters == 0 {
            return Err(Error::InvalidArgument("fixed-point tolerance and cap must be positive".into()));
        }
        if let Some(a) = &self.adaptive {
            a.validate()?;
        }
        Ok(())
    }
}

/// Increments `∇_τ φ^k` of all completed levels and the latest solution.
#[derive(Clone, Debug, PartialEq)]
pub struct HistoryBuffer {
    pub increments: Vec<Field>,
    pub phi_prev: Field,
}

impl HistoryBuffer {
    pub fn new(phi0: Field) -> Self {
        Self {
            increments: Vec::new(),
            phi_prev: phi0,
        }
    }

    pub fn level(&self) -> usize {
        self.increments.len()
    }

    pub fn push(&mut self, phi: Field) {
        self.increments.push(phi.sub(&self.phi_prev));
        self.phi_prev = phi;
    }
}

#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub phi: Field,
    pub iters: usize,
    /// `‖P₀⁻¹ R(φ)‖` with `P₀ = a₀ + κ ε² λ²`, recomputed from the scheme.
    pub residual: f64,
}

/// One nonlinear level solve.
struct LevelProblem<'a> {
    grid: &'a SpectralGrid,
    params: &'a ModelParams,
    cfg: &'a SolverConfig,
    level: usize,
    a0: f64,
    memory: Option<Field>,
    phi_prev: &'a Field,
    forcing: Option<&'a Field>,
    scheme: Scheme,
}

impl LevelProblem<'_> {
    fn concave_implicit(&self) -> bool {
        !self.cfg.linear_only && self.scheme != Scheme::ConvexSplitting
    }

    /// Right-hand side terms that do not depend on the iterate.
    fn fixed_rhs(&self) -> Spectrum {
        let mut rhs = self.phi_prev.scaled(self.a0);
        if let Some(mem) = &self.memory {
            rhs.axpy(-1.0, mem);
        }
        if let Some(g) = self.forcing {
            rhs.axpy(1.0, g);
        }
        let mut spec = self.grid.forward(&rhs);
        if !self.cfg.linear_only && self.scheme == Scheme::ConvexSplitting {
            let prev = self.grid.forward(self.phi_prev);
            for (idx, z) in spec.iter_mut().enumerate() {
                *z += prev[idx] * (self.params.kappa * self.grid.neg_div_grad_symbol(idx));
            }
        }
        spec
    }

    /// `∇·(|∇φ|²∇φ)` in transform space plus `max |∇φ|²`.
    fn cubic(&self, phi_hat: &[Complex64]) -> (Spectrum, f64) {
        let mut grad = self.grid.grad_spectral(phi_hat);
        let mag = grad.magnitude_squared();
        let gmax = mag.iter().copied().fold(0.0, f64::max);
        for ((x, y), m2) in grad
            .x
            .values_mut()
            .iter_mut()
            .zip(grad.y.values_mut().iter_mut())
            .zip(&mag)
        {
            *x *= m2;
            *y *= m2;
        }
        let mut div = self.grid.div_spectral(&grad);
        if self.cfg.dealias {
            self.grid.dealias(&mut div);
        }
        (div, gmax)
    }

    fn solve(&self) -> Result<StepOutcome> {
        let grid = self.grid;
        let kappa = self.params.kappa;
        let eps2 = self.params.eps2;
        let c = if self.concave_implicit() { 1.0 } else { 0.0 };
        let base: Vec<f64> = (0..grid.len())
            .map(|idx| self.a0 + kappa * eps2 * grid.neg_laplacian_symbol(idx).powi(2))
            .collect();
        let rhs = self.fixed_rhs();

        if self.cfg.linear_only {
            // no explicit part: one application of the map is the exact solve
            let phi_hat: Spectrum = rhs.iter().zip(&base).map(|(z, p)| z / p).collect();
            let phi = grid.inverse(phi_hat);
            let residual = self.residual(&phi, &base)?;
            return Ok(StepOutcome { phi, iters: 1, residual });
        }

        let mut phi_hat = grid.forward(self.phi_prev);
        let mut last_update = f64::INFINITY;
        for iter in 1..=self.cfg.fp_max_iters {
            let (cubic, gmax) = self.cubic(&phi_hat);
            let stab = (1.5 * gmax).max(c);
            let next_hat: Spectrum = (0..grid.len())
                .map(|idx| {
                    let sigma = grid.neg_div_grad_symbol(idx);
                    let p = base[idx] + kappa * (stab - c) * sigma;
                    (rhs[idx] + cubic[idx] * kappa + phi_hat[idx] * (kappa * stab * sigma)) / p
                })
                .collect();
            let diff: Spectrum = next_hat.iter().zip(&phi_hat).map(|(x, y)| x - y).collect();
            let update = grid.inner_spectral(&diff, &diff).sqrt();
            phi_hat = next_hat;
            last_update = update;
            if !update.is_finite() {
                break;
            }
            if update <= self.cfg.fp_tol {
                let phi = grid.inverse(phi_hat.clone());
                let residual = self.residual(&phi, &base)?;
                if residual <= 10.0 * self.cfg.fp_tol {
                    return Ok(StepOutcome { phi, iters: iter, residual });
                }
            }
        }
        Err(Error::NoConvergence {
            level: self.level,
            iters: self.cfg.fp_max_iters,
            last_update,
        })
    }

    /// Scheme residual assembled from the model operators, weighted by `P₀⁻¹`.
    fn residual(&self, phi: &Field, base: &[f64]) -> Result<f64> {
        let grid = self.grid;
        let mut r = phi.sub(self.phi_prev).scaled(self.a0);
        if let Some(mem) = &self.memory {
            r.axpy(1.0, mem);
        }
        let mu = self.potential(phi)?;
        r.axpy(self.params.kappa, &mu);
        if let Some(g) = self.forcing {
            r.axpy(-1.0, g);
        }
        let mut spec = grid.forward(&r);
        for (z, p) in spec.iter_mut().zip(base) {
            *z /= p;
        }
        Ok(grid.inner_spectral(&spec, &spec).sqrt())
    }

    fn potential(&self, phi: &Field) -> Result<Field> {
        scheme_potential(self.grid, phi, self.phi_prev, self.params, self.scheme, self.cfg.linear_only)
    }
}

/// The chemical potential as the given scheme defines it at level n.
pub fn scheme_potential(
    grid: &SpectralGrid,
    phi: &Field,
    phi_prev: &Field,
    params: &ModelParams,
    scheme: Scheme,
    linear_only: bool,
) -> Result<Field> {
    if linear_only {
        return Ok(grid.bilaplacian(phi).scaled(params.eps2));
    }
    match scheme {
        Scheme::L1Implicit | Scheme::BackwardEuler => model::chemical_potential(grid, phi, params),
        Scheme::ConvexSplitting => {
            let mut mu = grid.bilaplacian(phi).scaled(params.eps2);
            let mut g = grid.grad(phi);
            let mag = g.magnitude_squared();
            for ((x, y), m2) in g.x.values_mut().iter_mut().zip(g.y.values_mut().iter_mut()).zip(&mag) {
                *x *= m2;
                *y *= m2;
            }
            mu.axpy(-1.0, &grid.div(&g)?);
            mu.axpy(1.0, &grid.div(&grid.grad(phi_prev))?);
            Ok(mu)
        }
    }
}

fn check_step_bound(level: usize, tau: f64, alpha: f64, params: &ModelParams, mode: StepBoundMode) -> Result<()> {
    let bounds = step_bounds(alpha, params.eps2, params.kappa)?;
    let (bound, kind) = match mode {
        StepBoundMode::Off => return Ok(()),
        StepBoundMode::Convergence => (bounds.convergence, "convergence"),
        StepBoundMode::Solvability => (bounds.solvability, "solvability"),
    };
    if tau > bound * (1.0 + 1e-12) {
        return Err(Error::StepBound { level, tau, bound, kind });
    }
    Ok(())
}

fn step_fractional(
    grid: &SpectralGrid,
    hist: &HistoryBuffer,
    kset: &KernelSet,
    params: &ModelParams,
    cfg: &SolverConfig,
    n: usize,
    forcing: Option<&Field>,
    scheme: Scheme,
) -> Result<StepOutcome> {
    if hist.level() + 1 != n {
        return Err(Error::LengthMismatch {
            expected: n.saturating_sub(1),
            got: hist.level(),
        });
    }
    let row = kset.a_row(n)?;
    check_step_bound(n, kset.mesh().tau(n), kset.alpha(), params, cfg.enforce_step_bound)?;
    let memory = if n > 1 {
        let weights: Vec<f64> = (1..n).map(|k| row[n - k]).collect();
        Some(Field::combine(&weights, &hist.increments))
    } else {
        None
    };
    LevelProblem {
        grid,
        params,
        cfg,
        level: n,
        a0: row[0],
        memory,
        phi_prev: &hist.phi_prev,
        forcing,
        scheme,
    }
    .solve()
}

/// Fully implicit L1 step to level `n`; `kset` must hold level `n`.
pub fn step_l1(
    grid: &SpectralGrid,
    hist: &HistoryBuffer,
    kset: &KernelSet,
    params: &ModelParams,
    cfg: &SolverConfig,
    n: usize,
    forcing: Option<&Field>,
) -> Result<StepOutcome> {
    step_fractional(grid, hist, kset, params, cfg, n, forcing, Scheme::L1Implicit)
}

/// L1 step with the concave part `∇·∇φ` lagged to level `n - 1`.
pub fn step_convex_splitting(
    grid: &SpectralGrid,
    hist: &HistoryBuffer,
    kset: &KernelSet,
    params: &ModelParams,
    cfg: &SolverConfig,
    n: usize,
    forcing: Option<&Field>,
) -> Result<StepOutcome> {
    step_fractional(grid, hist, kset, params, cfg, n, forcing, Scheme::ConvexSplitting)
}

/// Backward Euler step of size `tau` for the integer-order model.
pub fn step_backward_euler(
    grid: &SpectralGrid,
    hist: &HistoryBuffer,
    tau: f64,
    params: &ModelParams,
    cfg: &SolverConfig,
    forcing: Option<&Field>,
) -> Result<StepOutcome> {
    let n = hist.level() + 1;
    check_step_bound(n, tau, 1.0, params, cfg.enforce_step_bound)?;
    LevelProblem {
        grid,
        params,
        cfg,
        level: n,
        a0: 1.0 / tau,
        memory: None,
        phi_prev: &hist.phi_prev,
        forcing,
        scheme: Scheme::BackwardEuler,
    }
    .solve()
}

/// `max{τ_min, τ_max / sqrt(1 + η ‖∂_τ φⁿ‖²)}`, optionally capped by the
/// enforced step bound.
pub fn adaptive_tau(
    grid: &SpectralGrid,
    phi_n: &Field,
    phi_prev: &Field,
    tau_n: f64,
    cfg: &SolverConfig,
    params: &ModelParams,
) -> Result<f64> {
    let ada = cfg
        .adaptive
        .ok_or_else(|| Error::InvalidArgument("adaptive_tau needs an adaptive configuration".into()))?;
    let rate = grid.norm(&phi_n.sub(phi_prev)) / tau_n;
    let mut tau = ada.tau_min.max(ada.tau_max / (1.0 + ada.eta * rate * rate).sqrt());
    let alpha = if cfg.scheme == Scheme::BackwardEuler { 1.0 } else { params.alpha };
    let bounds = step_bounds(alpha, params.eps2, params.kappa)?;
    match cfg.enforce_step_bound {
        StepBoundMode::Off => {}
        StepBoundMode::Convergence => tau = tau.min(bounds.convergence),
        StepBoundMode::Solvability => tau = tau.min(bounds.solvability),
    }
    Ok(tau)
}

/// Source term `g(t)` evaluated on the grid.
pub type Forcing = Arc<dyn Fn(&SpectralGrid, f64) -> Field + Send + Sync>;

/// Diagnostics of one completed level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub n: usize,
    pub t: f64,
    pub tau: f64,
    pub energy: f64,
    pub variational: f64,
    pub volume: f64,
    pub l2_norm: f64,
    pub l2_margin: f64,
    pub fp_iters: usize,
    pub residual: f64,
    /// `‖∂_τ φⁿ‖`.
    pub rate: f64,
}

/// Owns the state of one run and advances it level by level.
pub struct Solver {
    grid: SpectralGrid,
    params: ModelParams,
    cfg: SolverConfig,
    mesh: TimeMesh,
    kset: Option<KernelSet>,
    hist: HistoryBuffer,
    phi0: Field,
    mu_norms: Vec<f64>,
    forcing: Option<Forcing>,
}

impl Solver {
    pub fn new(
        grid: SpectralGrid,
        params: ModelParams,
        cfg: SolverConfig,
        phi0: Field,
        forcing: Option<Forcing>,
    ) -> Result<Self> {
        cfg.validate()?;
        grid.check(&phi0)?;
        let kset = match cfg.scheme {
            Scheme::BackwardEuler => None,
            _ => Some(KernelSet::new(params.alpha, TimeMesh::origin())?),
        };
        Ok(Self {
            grid,
            params,
            cfg,
            mesh: TimeMesh::origin(),
            kset,
            hist: HistoryBuffer::new(phi0.clone()),
            phi0,
            mu_norms: Vec::new(),
            forcing,
        })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn mesh(&self) -> &TimeMesh {
        &self.mesh
    }

    pub fn kernels(&self) -> Option<&KernelSet> {
        self.kset.as_ref()
    }

    pub fn level(&self) -> usize {
        self.hist.level()
    }

    pub fn time(&self) -> f64 {
        self.mesh.end_time()
    }

    pub fn phi(&self) -> &Field {
        &self.hist.phi_prev
    }

    pub fn phi0(&self) -> &Field {
        &self.phi0
    }

    pub fn history(&self) -> &HistoryBuffer {
        &self.hist
    }

    pub fn mu_norm_history(&self) -> &[f64] {
        &self.mu_norms
    }

    /// Diagnostics of the current level (the initial one for a fresh solver).
    pub fn current_report(&self) -> Result<StepReport> {
        let n = self.level();
        if n > 0 {
            let rate = self.grid.norm(&self.hist.increments[n - 1]) / self.mesh.tau(n);
            return self.report(0, 0.0, rate);
        }
        let e = model::free_energy(&self.grid, &self.phi0, &self.params)?;
        Ok(StepReport {
            n: 0,
            t: 0.0,
            tau: 0.0,
            energy: e,
            variational: e,
            volume: self.grid.volume(&self.phi0),
            l2_norm: self.grid.norm(&self.phi0),
            l2_margin: 0.0,
            fp_iters: 0,
            residual: 0.0,
            rate: 0.0,
        })
    }

    /// Solves the next level with step `tau`.
    pub fn advance(&mut self, tau: f64) -> Result<StepReport> {
        let n = self.level() + 1;
        let mut mesh = self.mesh.clone();
        let t = mesh.push_step(tau)?;
        let forcing = self.forcing.as_ref().map(|g| g(&self.grid, t));
        let outcome = match self.cfg.scheme {
            Scheme::BackwardEuler => {
                step_backward_euler(&self.grid, &self.hist, tau, &self.params, &self.cfg, forcing.as_ref())?
            }
            scheme => {
                let kset = self.kset.as_mut().expect("fractional schemes own kernels");
                if kset.levels() < n {
                    kset.push_step(tau)?;
                }
                let step = if scheme == Scheme::L1Implicit { step_l1 } else { step_convex_splitting };
                step(&self.grid, &self.hist, kset, &self.params, &self.cfg, n, forcing.as_ref())?
            }
        };
        if !outcome.phi.is_finite() {
            return Err(Error::NonFinite(format!("solution at level {n}")));
        }
        let mu = scheme_potential(
            &self.grid,
            &outcome.phi,
            &self.hist.phi_prev,
            &self.params,
            self.cfg.scheme,
            self.cfg.linear_only,
        )?;
        let rate = self.grid.norm(&outcome.phi.sub(&self.hist.phi_prev)) / tau;
        self.mesh = mesh;
        self.mu_norms.push(self.grid.norm(&mu).powi(2));
        self.hist.push(outcome.phi);
        self.report(outcome.iters, outcome.residual, rate)
    }

    fn report(&self, iters: usize, residual: f64, rate: f64) -> Result<StepReport> {
        let n = self.level();
        let phi = self.phi();
        let energy = model::free_energy(&self.grid, phi, &self.params)?;
        let (variational, alpha) = match &self.kset {
            Some(k) => (
                model::variational_energy(energy, k.p_row(), &self.mu_norms, self.params.kappa)?,
                Some(self.params.alpha),
            ),
            None => {
                // backward Euler: p^{(n)}_{n-j} → τ_j
                let taus: Vec<f64> = (1..=n).rev().map(|j| self.mesh.tau(j)).collect();
                (model::variational_energy(energy, &taus, &self.mu_norms, self.params.kappa)?, None)
            }
        };
        let t = self.time();
        Ok(StepReport {
            n,
            t,
            tau: self.mesh.tau(n),
            energy,
            variational,
            volume: self.grid.volume(phi),
            l2_norm: self.grid.norm(phi),
            l2_margin: model::l2_stability_margin(&self.grid, phi, &self.phi0, alpha, self.params.kappa, t),
            fp_iters: iters,
            residual,
            rate,
        })
    }
}

/// How the run chooses its steps.
#[derive(Clone, Debug)]
pub enum MeshPlan {
    /// Follow a prescribed mesh.
    Fixed(TimeMesh),
    /// Graded cell on `[0, T0]` ending with a step of `τ_min`, then adaptive
    /// steps up to `t_end`.
    Adaptive { t_end: f64 },
}

/// Graded initial cell used ahead of adaptive stepping: `γ = (2-α)/α`
/// (1 for backward Euler) and the smallest `N0` whose last step is ≤ `τ_min`.
pub fn adaptive_prefix(cfg: &SolverConfig, params: &ModelParams) -> Result<GradedSpec> {
    let ada = cfg
        .adaptive
        .ok_or_else(|| Error::InvalidArgument("adaptive plan needs an adaptive configuration".into()))?;
    let (gamma, alpha) = if cfg.scheme == Scheme::BackwardEuler {
        (1.0, 1.0)
    } else {
        ((2.0 - params.alpha) / params.alpha, params.alpha)
    };
    let bounds = step_bounds(alpha, params.eps2, params.kappa)?;
    let last = match cfg.enforce_step_bound {
        StepBoundMode::Off => ada.tau_min,
        StepBoundMode::Convergence => ada.tau_min.min(bounds.convergence),
        StepBoundMode::Solvability => ada.tau_min.min(bounds.solvability),
    };
    GradedSpec::with_last_step(gamma, ada.graded_t0, last)
}

pub struct RunOutcome {
    /// State the run started from.
    pub initial: StepReport,
    pub steps: Vec<StepReport>,
    /// Set when a step failed; `steps` holds everything before it.
    pub failure: Option<Error>,
}

/// Advances `solver` according to `plan`, calling `observe` after each level.
pub fn run<F>(solver: &mut Solver, plan: &MeshPlan, mut observe: F) -> Result<RunOutcome>
where
    F: FnMut(&Solver, &StepReport),
{
    let initial = solver.current_report()?;
    let mut steps = Vec::new();
    let mut failure = None;
    let mut record = |solver: &mut Solver, tau: f64, steps: &mut Vec<StepReport>| -> Result<()> {
        let rep = solver.advance(tau)?;
        observe(solver, &rep);
        steps.push(rep);
        Ok(())
    };
    match plan {
        MeshPlan::Fixed(mesh) => {
            for k in (solver.level() + 1)..=mesh.len() {
                if let Err(e) = record(solver, mesh.tau(k), &mut steps) {
                    failure = Some(e);
                    break;
                }
            }
        }
        MeshPlan::Adaptive { t_end } => {
            let t_end = *t_end;
            let prefix = adaptive_prefix(solver.config(), solver.params())?;
            if prefix.t0 >= t_end {
                return Err(Error::InvalidArgument(format!(
                    "graded cell end {} must precede the final time {t_end}",
                    prefix.t0
                )));
            }
            let pts = prefix.points();
            let cfg = *solver.config();
            let params = *solver.params();
            while solver.time() < t_end {
                let n = solver.level();
                let tau = if n < prefix.n0 {
                    pts[n + 1] - pts[n]
                } else {
                    let h = solver.history();
                    let prev = h.phi_prev.sub(&h.increments[n - 1]);
                    let tau = adaptive_tau(solver.grid(), &h.phi_prev, &prev, solver.mesh().tau(n), &cfg, &params)?;
                    let remaining = t_end - solver.time();
                    if tau >= remaining * (1.0 - 1e-12) {
                        remaining
                    } else {
                        tau
                    }
                };
                if let Err(e) = record(solver, tau, &mut steps) {
                    failure = Some(e);
                    break;
                }
            }
        }
    }
    Ok(RunOutcome {
        initial,
        steps,
        failure,
    })
}
