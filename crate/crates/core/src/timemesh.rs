//! Nonuniform time meshes `0 = t_0 < t_1 < ... < t_N = T`.

use std::io::{BufRead, Write};

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A strictly increasing time grid starting at zero.
///
/// Only the points are stored; steps `τ_k = t_k - t_{k-1}` and ratios
/// `r_k = τ_k / τ_{k-1}` are derived from them, so they can never drift out
/// of sync. The mesh can be extended one step at a time, which is how the
/// adaptive runs grow it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeMesh {
    points: Vec<f64>,
}

impl TimeMesh {
    /// Validates and wraps a list of time points.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidMesh("no points".into()));
        }
        if points[0] != 0.0 {
            return Err(Error::InvalidMesh(format!(
                "first point must be 0, got {}",
                points[0]
            )));
        }
        for (k, w) in points.windows(2).enumerate() {
            if !w[1].is_finite() || w[1] <= w[0] {
                return Err(Error::InvalidMesh(format!(
                    "points not strictly increasing at k = {}: {} -> {}",
                    k + 1,
                    w[0],
                    w[1]
                )));
            }
        }
        Ok(Self { points })
    }

    /// A mesh holding only `t_0 = 0`, to be grown with [`TimeMesh::push_step`].
    pub fn origin() -> Self {
        Self { points: vec![0.0] }
    }

    /// Builds a mesh from a list of step sizes.
    pub fn from_steps(steps: &[f64]) -> Result<Self> {
        let mut mesh = Self::origin();
        for &tau in steps {
            mesh.push_step(tau)?;
        }
        Ok(mesh)
    }

    /// Appends `t_{N+1} = t_N + tau`.
    pub fn push_step(&mut self, tau: f64) -> Result<f64> {
        let last = self.end_time();
        let next = last + tau;
        if !(tau > 0.0) || !next.is_finite() || next <= last {
            return Err(Error::InvalidMesh(format!("step {tau:e} at t = {last}")));
        }
        self.points.push(next);
        Ok(next)
    }

    /// Number of steps N.
    pub fn len(&self) -> usize {
        self.points.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// `t_k` for `0 ≤ k ≤ N`.
    pub fn t(&self, k: usize) -> f64 {
        self.points[k]
    }

    /// `τ_k` for `1 ≤ k ≤ N`.
    pub fn tau(&self, k: usize) -> f64 {
        self.points[k] - self.points[k - 1]
    }

    pub fn end_time(&self) -> f64 {
        *self.points.last().expect("mesh always holds t_0")
    }

    /// Steps `τ_1, ..., τ_N`.
    pub fn steps(&self) -> Vec<f64> {
        self.points.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Ratios `r_2, ..., r_N`.
    pub fn ratios(&self) -> Vec<f64> {
        let steps = self.steps();
        steps.windows(2).map(|w| w[1] / w[0]).collect()
    }

    /// Maximum step size τ.
    pub fn max_step(&self) -> f64 {
        self.steps().into_iter().fold(0.0, f64::max)
    }

    /// Truncated copy holding `t_0..=t_n`.
    pub fn prefix(&self, n: usize) -> Self {
        Self {
            points: self.points[..=n].to_vec(),
        }
    }

    /// Writes one point per line at full (round-trip) precision.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        for t in &self.points {
            writeln!(out, "{t}")?;
        }
        Ok(())
    }

    /// Reads the format produced by [`TimeMesh::write_text`]. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut points = Vec::new();
        for line in input.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let t = line
                .parse::<f64>()
                .map_err(|e| Error::InvalidMesh(format!("bad point {line:?}: {e}")))?;
            points.push(t);
        }
        Self::from_points(points)
    }
}

/// Parameters of the graded initial cell `[0, T0]` split into `N0` steps
/// with `t_k = T0 (k/N0)^γ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradedSpec {
    pub gamma: f64,
    pub t0: f64,
    pub n0: usize,
}

impl GradedSpec {
    pub fn new(gamma: f64, t0: f64, n0: usize) -> Result<Self> {
        if !(gamma >= 1.0) {
            return Err(Error::InvalidArgument(format!("grading exponent {gamma} < 1")));
        }
        if !(t0 > 0.0) || !t0.is_finite() {
            return Err(Error::InvalidArgument(format!("graded cell end {t0} must be > 0")));
        }
        if n0 == 0 {
            return Err(Error::InvalidArgument("graded cell needs N0 ≥ 1".into()));
        }
        Ok(Self { gamma, t0, n0 })
    }

    /// The split used by the convergence tests: `T0 = min{1/γ, T}` and
    /// `N0 = ⌈N / (T + 1 - 1/γ)⌉`.
    pub fn for_convergence(n: usize, gamma: f64, t_end: f64) -> Result<Self> {
        if !(gamma >= 1.0) {
            return Err(Error::InvalidArgument(format!("grading exponent {gamma} < 1")));
        }
        if !(t_end > 0.0) {
            return Err(Error::InvalidArgument(format!("final time {t_end} must be > 0")));
        }
        let t0 = (1.0 / gamma).min(t_end);
        let n0 = (n as f64 / (t_end + 1.0 - 1.0 / gamma)).ceil() as usize;
        if n0 > n {
            return Err(Error::MeshInfeasible { n0, n });
        }
        Self::new(gamma, t0, n0.max(1))
    }

    /// Smallest `N0` whose last graded step `T0 (1 - ((N0-1)/N0)^γ)` is at
    /// most `tau_last`.
    pub fn with_last_step(gamma: f64, t0: f64, tau_last: f64) -> Result<Self> {
        if !(tau_last > 0.0) {
            return Err(Error::InvalidArgument(format!("target step {tau_last} must be > 0")));
        }
        let last_step = |n0: usize| {
            let n0f = n0 as f64;
            t0 * (1.0 - ((n0f - 1.0) / n0f).powf(gamma))
        };
        let mut n0 = 1usize;
        while last_step(n0) > tau_last {
            n0 += 1;
            if n0 > 100_000_000 {
                return Err(Error::InvalidArgument(format!(
                    "no graded cell with last step ≤ {tau_last:e}"
                )));
            }
        }
        Self::new(gamma, t0, n0)
    }

    /// The graded points `t_0..=t_{N0}`, with `t_{N0} = T0` exactly.
    pub fn points(&self) -> Vec<f64> {
        let n0 = self.n0 as f64;
        let mut pts: Vec<f64> = (0..=self.n0)
            .map(|k| self.t0 * (k as f64 / n0).powf(self.gamma))
            .collect();
        pts[self.n0] = self.t0;
        pts
    }
}

fn check_n_t(n: usize, t_end: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("number of steps must be ≥ 1".into()));
    }
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidArgument(format!("final time {t_end} must be > 0")));
    }
    Ok(())
}

/// `t_k = kT/N`.
pub fn build_uniform(n: usize, t_end: f64) -> Result<TimeMesh> {
    check_n_t(n, t_end)?;
    let mut pts: Vec<f64> = (0..=n).map(|k| k as f64 * t_end / n as f64).collect();
    pts[n] = t_end;
    TimeMesh::from_points(pts)
}

/// Pure graded mesh `t_k = T (k/N)^γ`.
pub fn build_graded(n: usize, gamma: f64, t_end: f64) -> Result<TimeMesh> {
    check_n_t(n, t_end)?;
    TimeMesh::from_points(GradedSpec::new(gamma, t_end, n)?.points())
}

/// Steps `T ε_k / Σε` with `ε_k` uniform in (0, 1).
pub fn build_random(n: usize, t_end: f64, seed: u64) -> Result<TimeMesh> {
    check_n_t(n, t_end)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = append_random_tail(vec![0.0], n, t_end, &mut rng);
    TimeMesh::from_points(pts)
}

/// Graded cell on `[0, T0]` followed by a random tail on `[T0, T]`, with the
/// split chosen by [`GradedSpec::for_convergence`].
pub fn build_graded_random(n: usize, gamma: f64, t_end: f64, seed: u64) -> Result<TimeMesh> {
    check_n_t(n, t_end)?;
    let spec = GradedSpec::for_convergence(n, gamma, t_end)?;
    let mut pts = spec.points();
    let tail = n - spec.n0;
    if tail == 0 {
        // γ = 1 or T0 = T: the graded cell already covers [0, T]
        *pts.last_mut().unwrap() = t_end;
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        pts = append_random_tail(pts, tail, t_end, &mut rng);
    }
    TimeMesh::from_points(pts)
}

fn append_random_tail(mut pts: Vec<f64>, count: usize, t_end: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let start = *pts.last().unwrap();
    let eps: Vec<f64> = (0..count).map(|_| rng.sample::<f64, _>(Open01)).collect();
    let sum: f64 = eps.iter().sum();
    let span = t_end - start;
    let mut t = start;
    for e in &eps {
        t += span * e / sum;
        pts.push(t);
    }
    // the renormalized steps already sum to the span up to rounding
    *pts.last_mut().unwrap() = t_end;
    pts
}

/// Result of [`check_ag`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgReport {
    /// Smallest C with `τ_k ≤ τ C t_k^{1-1/γ}` for all k.
    pub step_constant: f64,
    /// Smallest C with `t_k ≤ C t_{k-1}` for k ≥ 2 (1 for single-step meshes).
    pub ratio_constant: f64,
    /// `max(step_constant, ratio_constant)`.
    pub c_gamma_estimate: f64,
    pub satisfied: bool,
}

/// Estimates the constants of the graded-mesh assumption with the default
/// threshold 100.
pub fn check_ag(mesh: &TimeMesh, gamma: f64) -> AgReport {
    check_ag_with_threshold(mesh, gamma, 100.0)
}

pub fn check_ag_with_threshold(mesh: &TimeMesh, gamma: f64, threshold: f64) -> AgReport {
    let tau_max = mesh.max_step();
    let expo = 1.0 - 1.0 / gamma;
    let mut step_constant = 0.0f64;
    let mut ratio_constant = 1.0f64;
    for k in 1..=mesh.len() {
        let c = mesh.tau(k) / (tau_max * mesh.t(k).powf(expo));
        step_constant = step_constant.max(c);
        if k >= 2 {
            ratio_constant = ratio_constant.max(mesh.t(k) / mesh.t(k - 1));
        }
    }
    let c = step_constant.max(ratio_constant);
    AgReport {
        step_constant,
        ratio_constant,
        c_gamma_estimate: c,
        satisfied: c.is_finite() && c <= threshold,
    }
}

/// `r_* = min_k {1, r_k}`.
pub fn min_ratio(mesh: &TimeMesh) -> f64 {
    mesh.ratios().into_iter().fold(1.0, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn uniform_points() {
        let m = build_uniform(4, 1.0).unwrap();
        assert_eq!(m.points(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(m.ratios().iter().all(|&r| (r - 1.0).abs() < 1e-14));
        assert_eq!(build_uniform(1, 2.0).unwrap().steps(), vec![2.0]);
        let m = build_uniform(200, 1.0).unwrap();
        assert_relative_eq!(m.max_step(), 5e-3, max_relative = 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(build_uniform(0, 1.0).is_err());
        assert!(build_uniform(3, 0.0).is_err());
        assert!(build_uniform(3, -1.0).is_err());
        assert!(TimeMesh::from_points(vec![0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(TimeMesh::from_points(vec![0.1, 0.5]).is_err());
        assert!(TimeMesh::from_steps(&[0.1, 0.0]).is_err());
        assert!(build_graded(10, 0.5, 1.0).is_err());
    }

    #[test]
    fn graded_random_gamma_one_is_uniform() {
        let g = build_graded_random(40, 1.0, 1.0, 7).unwrap();
        let u = build_uniform(40, 1.0).unwrap();
        for (a, b) in g.points().iter().zip(u.points()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn graded_random_last_graded_step() {
        let m = build_graded_random(40, 2.0, 1.0, 3).unwrap();
        let spec = GradedSpec::for_convergence(40, 2.0, 1.0).unwrap();
        assert_eq!(spec.t0, 0.5);
        // N0 = ceil(40 / 1.5)
        assert_eq!(spec.n0, 27);
        let n0 = spec.n0 as f64;
        let expected = 0.5 * (1.0 - ((n0 - 1.0) / n0).powi(2));
        assert_relative_eq!(m.tau(spec.n0), expected, max_relative = 1e-12);
        assert_eq!(m.len(), 40);
        assert_eq!(m.end_time(), 1.0);
    }

    #[test]
    fn graded_random_infeasible() {
        // T + 1 - 1/γ < 1 makes N0 exceed N
        assert!(matches!(
            build_graded_random(10, 2.0, 0.2, 1),
            Err(Error::MeshInfeasible { .. })
        ));
    }

    #[test]
    fn graded_ratio_constant_is_two_to_gamma() {
        for &gamma in &[1.0, 1.5, 2.0, 3.0] {
            let m = build_graded(50, gamma, 1.0).unwrap();
            let rep = check_ag(&m, gamma);
            assert_relative_eq!(rep.ratio_constant, 2f64.powf(gamma), max_relative = 1e-12);
        }
        let rep = check_ag(&build_uniform(30, 1.0).unwrap(), 1.0);
        assert!(rep.satisfied);
        assert_relative_eq!(rep.ratio_constant, 2.0, max_relative = 1e-14);
        assert_relative_eq!(rep.step_constant, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn min_ratio_examples() {
        assert_eq!(min_ratio(&build_uniform(8, 1.0).unwrap()), 1.0);
        assert_eq!(min_ratio(&TimeMesh::from_steps(&[1.0, 0.5]).unwrap()), 0.5);
        let m = build_graded(10, 2.0, 1.0).unwrap();
        let brute = (2..=10)
            .map(|k| m.tau(k) / m.tau(k - 1))
            .fold(1.0f64, f64::min);
        assert_eq!(min_ratio(&m), brute);
    }

    #[test]
    fn with_last_step_is_minimal() {
        let spec = GradedSpec::with_last_step(4.0, 0.01, 1e-3).unwrap();
        let last = |n0: usize| 0.01 * (1.0 - ((n0 as f64 - 1.0) / n0 as f64).powf(4.0));
        assert!(last(spec.n0) <= 1e-3);
        assert!(last(spec.n0 - 1) > 1e-3);
    }

    #[test]
    fn text_round_trip() {
        let m = build_graded_random(33, 1.7, 1.3, 11).unwrap();
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let back = TimeMesh::read_text(buf.as_slice()).unwrap();
        assert_eq!(m, back);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn steps_sum_to_t(n in 2usize..300, gamma in 1.0f64..5.0, t_end in 0.9f64..3.0, seed in any::<u64>()) {
                if let Ok(m) = build_graded_random(n, gamma, t_end, seed) {
                    let s: f64 = m.steps().iter().sum();
                    prop_assert!((s - t_end).abs() <= 1e-12 * t_end);
                    prop_assert_eq!(m.len(), n);
                    prop_assert!(min_ratio(&m) > 0.0);
                    let again = build_graded_random(n, gamma, t_end, seed).unwrap();
                    prop_assert_eq!(m, again);
                }
            }
        }
    }
}
