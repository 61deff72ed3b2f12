//! Step-size restrictions and the L1 consistency diagnostics.

use serde::Serialize;

use super::special::{mittag_leffler, omega};
use super::KernelSet;
use crate::error::{Error, Result};
use crate::quadrature::integrate;

/// Largest admissible steps: `convergence = (2 ω_{2-α}(1) ε²/κ)^{1/α}` and
/// `solvability = (4 ω_{2-α}(1) ε²/κ)^{1/α}`. The solvability bound is also
/// the one under which the variational energy decays.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepBounds {
    pub convergence: f64,
    pub solvability: f64,
}

pub fn step_bounds(alpha: f64, eps2: f64, kappa: f64) -> Result<StepBounds> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("order {alpha} outside (0, 1]")));
    }
    if !(eps2 > 0.0) || !(kappa > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps2 = {eps2} and kappa = {kappa} must be positive"
        )));
    }
    let w = omega(2.0 - alpha, 1.0);
    Ok(StepBounds {
        convergence: (2.0 * w * eps2 / kappa).powf(1.0 / alpha),
        solvability: (4.0 * w * eps2 / kappa).powf(1.0 / alpha),
    })
}

fn cell_moments<F: Fn(f64) -> f64>(kset: &KernelSet, upto: usize, vtt_norm: &F) -> Result<Vec<f64>> {
    let mesh = kset.mesh();
    (1..=upto)
        .map(|k| {
            let lo = mesh.t(k - 1);
            integrate(|t| (t - lo) * vtt_norm(t), lo, mesh.t(k), 1e-300, 1e-10)
        })
        .collect()
}

/// `2 Σ_{k=1}^n p^{(n)}_{n-k} a^{(k)}_0 ∫_{t_{k-1}}^{t_k} (t - t_{k-1}) ‖v_tt‖ dt`
/// at a single level `n`.
pub fn consistency_bound<F: Fn(f64) -> f64>(kset: &KernelSet, vtt_norm: F, n: usize) -> Result<f64> {
    let p = kset.dcc_row_at(n)?;
    let moments = cell_moments(kset, n, &vtt_norm)?;
    let mut sum = 0.0;
    for k in 1..=n {
        sum += p[n - k] * kset.a_row(k)?[0] * moments[k - 1];
    }
    Ok(2.0 * sum)
}

/// The same bound for every built level `n = 1..=levels()`, in O(N²).
pub fn consistency_bounds<F: Fn(f64) -> f64>(kset: &KernelSet, vtt_norm: F) -> Result<Vec<f64>> {
    let levels = kset.levels();
    let moments = cell_moments(kset, levels, &vtt_norm)?;
    let weighted: Vec<f64> = (1..=levels)
        .map(|k| Ok(kset.a_row(k)?[0] * moments[k - 1]))
        .collect::<Result<_>>()?;
    // rebuild DCC rows level by level: p^{(n)}_{n-k} = p^{(n-1)}_{n-1-k} + θ^{(n)}_{n-k}
    let mut p: Vec<f64> = Vec::with_capacity(levels);
    let mut out = Vec::with_capacity(levels);
    for n in 1..=levels {
        let theta = kset.theta_row(n)?;
        let mut next = Vec::with_capacity(n);
        next.push(theta[0]);
        for j in 1..n {
            next.push(p[j - 1] + theta[j]);
        }
        p = next;
        let s: f64 = (1..=n).map(|k| p[n - k] * weighted[k - 1]).sum();
        out.push(2.0 * s);
    }
    Ok(out)
}

/// Error envelope
/// `2 E_α(κ t_n^α / (2 ε² r_*)) (spatial + consistency)`
/// where `spatial` stands for the `C t_n^α h^m` projection term and
/// `consistency` for the maximal consistency bound up to level n.
pub fn error_envelope(
    alpha: f64,
    t_n: f64,
    min_ratio: f64,
    eps2: f64,
    kappa: f64,
    spatial: f64,
    consistency: f64,
) -> Result<f64> {
    if !(min_ratio > 0.0 && min_ratio <= 1.0) {
        return Err(Error::InvalidArgument(format!("min ratio {min_ratio} outside (0, 1]")));
    }
    let z = kappa * t_n.powf(alpha) / (2.0 * eps2 * min_ratio);
    Ok(2.0 * mittag_leffler(alpha, z)? * (spatial + consistency))
}
