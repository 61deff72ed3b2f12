//! Property tests for the spatial operators, the model and the stepper.

use proptest::prelude::*;

use tfmbe::kernels::step_bounds;
use tfmbe::model::{chemical_potential, free_energy};
use tfmbe::stepper::{Solver, StepBoundMode};
use tfmbe::{Field, ModelParams, Scheme, SolverConfig, SpectralGrid};

/// Trigonometric polynomial with wavenumbers up to 4 in each direction.
fn band_limited(grid: &SpectralGrid, c: &[f64]) -> Field {
    let nu = grid.nu();
    grid.project(|x, y| {
        let mut s = 0.0;
        let mut i = 0;
        for p in 0..4 {
            for q in 0..4 {
                let arg = nu * ((p + 1) as f64 * x + q as f64 * y);
                s += c[i] * arg.cos() + c[i + 1] * arg.sin();
                i += 2;
            }
        }
        s
    })
    .unwrap()
}

fn coeffs(scale: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-scale..scale, 32)
}

fn max_abs(u: &Field) -> f64 {
    u.values().iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn operators_commute(c in coeffs(1.0), length in 1.0f64..10.0) {
        let g = SpectralGrid::new(16, length).unwrap();
        let u = band_limited(&g, &c);
        let div_grad = g.div(&g.grad(&u)).unwrap();
        let lap = g.laplacian(&u);
        prop_assert!(div_grad.max_abs_diff(&lap) <= 1e-11 * max_abs(&lap).max(1.0));
        let ll = g.laplacian(&lap);
        prop_assert!(g.bilaplacian(&u).max_abs_diff(&ll) <= 1e-11 * max_abs(&ll).max(1.0));
        let gl = g.grad(&lap);
        let lg = g.laplacian(&g.grad(&u).x);
        prop_assert!(gl.x.max_abs_diff(&lg) <= 1e-11 * max_abs(&lg).max(1.0));
    }

    #[test]
    fn green_formulas_hold(a in coeffs(1.0), b in coeffs(1.0)) {
        let g = SpectralGrid::periodic_2pi(16).unwrap();
        let v = band_limited(&g, &a);
        let w = band_limited(&g, &b);
        let lhs = -g.inner(&g.laplacian(&v), &w).unwrap();
        let rhs = g.inner_vec(&g.grad(&v), &g.grad(&w)).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
        let lhs = g.inner(&g.bilaplacian(&v), &w).unwrap();
        let rhs = g.inner(&g.laplacian(&v), &g.laplacian(&w)).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
    }

    #[test]
    fn transform_round_trip(values in prop::collection::vec(-1.0f64..1.0, 256)) {
        let g = SpectralGrid::periodic_2pi(16).unwrap();
        let u = g.field_from(values).unwrap();
        prop_assert!(g.inverse(g.forward(&u)).max_abs_diff(&u) <= 1e-13);
    }

    #[test]
    fn energy_ignores_constants_and_potential_is_mean_free(
        c in coeffs(0.3),
        shift in -5.0f64..5.0,
        eps2 in 0.01f64..1.0,
    ) {
        let g = SpectralGrid::periodic_2pi(16).unwrap();
        let p = ModelParams::new(eps2, 1.0, 0.5).unwrap();
        let phi = band_limited(&g, &c);
        let e = free_energy(&g, &phi, &p).unwrap();
        let e_shift = free_energy(&g, &phi.add(&g.constant(shift)), &p).unwrap();
        prop_assert!(e >= 0.0);
        prop_assert!((e - e_shift).abs() <= 1e-10 * e.abs().max(1.0));
        let mu = chemical_potential(&g, &phi, &p).unwrap();
        prop_assert!(g.volume(&mu).abs() <= 1e-10 * max_abs(&mu).max(1.0));
    }

    #[test]
    fn cubic_flux_is_monotone(u in prop::array::uniform2(-3.0f64..3.0), v in prop::array::uniform2(-3.0f64..3.0)) {
        let nu = u[0] * u[0] + u[1] * u[1];
        let nv = v[0] * v[0] + v[1] * v[1];
        let s = (nu * u[0] - nv * v[0]) * (u[0] - v[0]) + (nu * u[1] - nv * v[1]) * (u[1] - v[1]);
        prop_assert!(s >= -1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn compliant_l1_steps_keep_the_invariants(
        c in coeffs(0.1),
        alpha in 0.2f64..0.95,
        fracs in prop::collection::vec(0.1f64..1.0, 6),
    ) {
        let g = SpectralGrid::periodic_2pi(16).unwrap();
        let params = ModelParams::new(0.1, 1.0, alpha).unwrap();
        let cfg = SolverConfig {
            enforce_step_bound: StepBoundMode::Solvability,
            ..SolverConfig::default()
        };
        let bound = step_bounds(alpha, 0.1, 1.0).unwrap().solvability.min(0.1);
        let phi0 = band_limited(&g, &c);
        let v0 = g.volume(&phi0);
        let mut s = Solver::new(g.clone(), params, cfg, phi0, None).unwrap();
        let mut prev = s.current_report().unwrap().variational;
        for f in fracs {
            let rep = s.advance(f * bound).unwrap();
            prop_assert!(rep.residual <= 10.0 * cfg.fp_tol);
            prop_assert!((rep.volume - v0).abs() <= 1e-9 * g.area());
            prop_assert!(rep.variational >= rep.energy);
            prop_assert!(rep.variational <= prev + 1e-9 * prev.abs().max(1.0));
            prop_assert!(rep.l2_margin >= -1e-8);
            prev = rep.variational;
        }
    }

    #[test]
    fn every_scheme_conserves_volume(c in coeffs(0.2), taus in prop::collection::vec(1e-3f64..0.2, 4)) {
        let g = SpectralGrid::periodic_2pi(16).unwrap();
        let params = ModelParams::new(0.1, 1.0, 0.6).unwrap();
        for scheme in [Scheme::L1Implicit, Scheme::ConvexSplitting, Scheme::BackwardEuler] {
            let cfg = SolverConfig { scheme, ..SolverConfig::default() };
            let phi0 = band_limited(&g, &c).add(&g.constant(0.3));
            let v0 = g.volume(&phi0);
            let mut s = Solver::new(g.clone(), params, cfg, phi0, None).unwrap();
            for &tau in &taus {
                let rep = s.advance(tau).unwrap();
                prop_assert!((rep.volume - v0).abs() <= 1e-9 * g.area(), "{:?}", scheme);
            }
        }
    }
}
