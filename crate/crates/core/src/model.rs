//! Model ingredients: slope-selection flux, chemical potential and energies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::omega;
use crate::spectral::{Field, SpectralGrid, VectorField};

/// `ε²`, mobility `κ` and fractional order `α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub eps2: f64,
    pub kappa: f64,
    pub alpha: f64,
}

impl ModelParams {
    pub fn new(eps2: f64, kappa: f64, alpha: f64) -> Result<Self> {
        if !(eps2 > 0.0) || !(kappa > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "eps2 = {eps2} and kappa = {kappa} must be positive"
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("fractional order {alpha} outside (0, 1)")));
        }
        Ok(Self { eps2, kappa, alpha })
    }
}

/// `f(w) = (|w|² - 1) w` pointwise.
pub fn nonlinear_flux(w: &VectorField) -> VectorField {
    let mut out = w.clone();
    let mag = w.magnitude_squared();
    for ((x, y), m2) in out
        .x
        .values_mut()
        .iter_mut()
        .zip(out.y.values_mut().iter_mut())
        .zip(mag)
    {
        *x *= m2 - 1.0;
        *y *= m2 - 1.0;
    }
    out
}

/// `μ = ε² Δ_h² φ - ∇_h·f(∇_h φ)`.
pub fn chemical_potential(grid: &SpectralGrid, phi: &Field, p: &ModelParams) -> Result<Field> {
    grid.check(phi)?;
    let mut mu = grid.bilaplacian(phi).scaled(p.eps2);
    let flux = nonlinear_flux(&grid.grad(phi));
    mu.axpy(-1.0, &grid.div(&flux)?);
    Ok(mu)
}

/// `E[φ] = (ε²/2)‖Δ_h φ‖² + (1/4)‖|∇_h φ|² - 1‖²`.
pub fn free_energy(grid: &SpectralGrid, phi: &Field, p: &ModelParams) -> Result<f64> {
    grid.check(phi)?;
    let lap = grid.norm(&grid.laplacian(phi));
    let h2 = grid.spacing().powi(2);
    let bulk: f64 = grid
        .grad(phi)
        .magnitude_squared()
        .into_iter()
        .map(|g| (g - 1.0).powi(2))
        .sum::<f64>()
        * h2;
    Ok(0.5 * p.eps2 * lap * lap + 0.25 * bulk)
}

/// `𝓔_α = E + (κ/2) Σ_{j=1}^n p^{(n)}_{n-j} ‖μ^j‖²`, with `n = mu_norm_sq.len()`
/// and `𝓔_α = E` at `n = 0`.
pub fn variational_energy(energy: f64, dcc_row: &[f64], mu_norm_sq: &[f64], kappa: f64) -> Result<f64> {
    let n = mu_norm_sq.len();
    if n == 0 {
        return Ok(energy);
    }
    if dcc_row.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: dcc_row.len(),
        });
    }
    let memory: f64 = (1..=n).map(|j| dcc_row[n - j] * mu_norm_sq[j - 1]).sum();
    Ok(energy + 0.5 * kappa * memory)
}

/// `‖φ⁰‖² + (κ/2)|Ω_h| ω_{1+α}(t_n) - ‖φⁿ‖²`. With `alpha = None` the
/// integer-order form `t_n` replaces `ω_{1+α}(t_n)`.
pub fn l2_stability_margin(
    grid: &SpectralGrid,
    phi_n: &Field,
    phi_0: &Field,
    alpha: Option<f64>,
    kappa: f64,
    t_n: f64,
) -> f64 {
    let growth = match alpha {
        Some(a) => omega(1.0 + a, t_n),
        None => t_n,
    };
    grid.norm(phi_0).powi(2) + 0.5 * kappa * grid.area() * growth - grid.norm(phi_n).powi(2)
}

/// Energies of one level plus the `‖μ^j‖²` history that feeds `𝓔_α`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyState {
    pub energy: f64,
    pub variational: f64,
    pub mu_norm_history: Vec<f64>,
}
