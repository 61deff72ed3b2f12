//! Discrete convolution kernels of the nonuniform L1 formula
//!
//! ```text
//! (∂_τ^α v)^n = Σ_{k=1}^n a^{(n)}_{n-k} ∇_τ v^k,
//! a^{(n)}_{n-k} = (1/τ_k) ∫_{t_{k-1}}^{t_k} ω_{1-α}(t_n - s) ds,
//! ```
//!
//! together with the discrete orthogonal convolution (DOC) kernels θ, the
//! convolution inverse of `a`, and the discrete complementary convolution
//! (DCC) kernels `p^{(n)}_{n-k} = Σ_{j=k}^n θ^{(j)}_{j-k}`.
//!
//! Rows are stored with the lag as index: `a_row(n)[j] = a^{(n)}_j`.

mod bounds;
pub mod special;

pub use bounds::{
    consistency_bound, consistency_bounds, error_envelope, step_bounds, StepBounds,
};
pub use special::{gamma, ln_gamma, mittag_leffler, omega};

use crate::error::{Error, Result};
use crate::timemesh::TimeMesh;

/// `(x + d)^β - x^β` without cancellation for `x ≫ d`.
fn power_increment(x: f64, d: f64, beta: f64) -> f64 {
    if x == 0.0 {
        d.powf(beta)
    } else {
        x.powf(beta) * (beta * (d / x).ln_1p()).exp_m1()
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("fractional order {alpha} outside (0, 1)")))
    }
}

/// L1 kernels `a^{(n)}_0, ..., a^{(n)}_{n-1}` of level `n` in closed form.
pub fn l1_row(mesh: &TimeMesh, alpha: f64, n: usize) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if n == 0 || n > mesh.len() {
        return Err(Error::LevelOutOfRange {
            level: n,
            available: mesh.len(),
        });
    }
    let beta = 1.0 - alpha;
    let scale = 1.0 / gamma(2.0 - alpha);
    let tn = mesh.t(n);
    Ok((0..n)
        .map(|j| {
            let k = n - j;
            let tau = mesh.tau(k);
            scale * power_increment(tn - mesh.t(k), tau, beta) / tau
        })
        .collect())
}

/// Lower-triangular kernel tables built level by level on a mesh.
///
/// Levels are added with [`KernelSet::extend`] (mesh already long enough)
/// or [`KernelSet::push_step`] (mesh grows by one step). Building level `n`
/// costs O(n²) because of the DOC recursion.
#[derive(Clone, Debug)]
pub struct KernelSet {
    alpha: f64,
    mesh: TimeMesh,
    a: Vec<Vec<f64>>,
    theta: Vec<Vec<f64>>,
    p: Vec<f64>,
    p_prev: Vec<f64>,
}

impl KernelSet {
    /// An empty kernel set; no levels are built yet.
    pub fn new(alpha: f64, mesh: TimeMesh) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            alpha,
            mesh,
            a: Vec::new(),
            theta: Vec::new(),
            p: Vec::new(),
            p_prev: Vec::new(),
        })
    }

    /// Builds every level of `mesh`.
    pub fn build(alpha: f64, mesh: TimeMesh) -> Result<Self> {
        let n = mesh.len();
        let mut ks = Self::new(alpha, mesh)?;
        ks.extend_to(n)?;
        Ok(ks)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mesh(&self) -> &TimeMesh {
        &self.mesh
    }

    /// Number of levels built.
    pub fn levels(&self) -> usize {
        self.a.len()
    }

    /// Builds the next level. Fails when the mesh has no further step.
    pub fn extend(&mut self) -> Result<usize> {
        let n = self.levels() + 1;
        if n > self.mesh.len() {
            return Err(Error::LevelOutOfRange {
                level: n,
                available: self.mesh.len(),
            });
        }
        let row = l1_row(&self.mesh, self.alpha, n)?;
        self.a.push(row);
        let theta = self.doc_row(n);
        self.dcc_update(&theta);
        self.theta.push(theta);
        Ok(n)
    }

    pub fn extend_to(&mut self, n: usize) -> Result<()> {
        while self.levels() < n {
            self.extend()?;
        }
        Ok(())
    }

    /// Appends a step to the mesh and builds its level.
    pub fn push_step(&mut self, tau: f64) -> Result<usize> {
        if self.mesh.len() != self.levels() {
            return Err(Error::InvalidArgument(
                "push_step requires every mesh level to be built".into(),
            ));
        }
        self.mesh.push_step(tau)?;
        self.extend()
    }

    fn check_level(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.levels() {
            Err(Error::LevelOutOfRange {
                level: n,
                available: self.levels(),
            })
        } else {
            Ok(())
        }
    }

    /// `a^{(n)}_j` for `j = 0..n`.
    pub fn a_row(&self, n: usize) -> Result<&[f64]> {
        self.check_level(n)?;
        Ok(&self.a[n - 1])
    }

    /// `θ^{(n)}_j` for `j = 0..n`.
    pub fn theta_row(&self, n: usize) -> Result<&[f64]> {
        self.check_level(n)?;
        Ok(&self.theta[n - 1])
    }

    /// DCC row `p^{(n)}_j` of the newest level `n = levels()`.
    pub fn p_row(&self) -> &[f64] {
        &self.p
    }

    /// DCC row of level `levels() - 1` (empty at level 1).
    pub fn p_prev_row(&self) -> &[f64] {
        &self.p_prev
    }

    /// DCC row of an arbitrary built level, summed from the stored θ rows.
    pub fn dcc_row_at(&self, n: usize) -> Result<Vec<f64>> {
        self.check_level(n)?;
        if n == self.levels() {
            return Ok(self.p.clone());
        }
        let mut p = Vec::with_capacity(n);
        for j in 0..n {
            let k = n - j;
            p.push((k..=n).map(|i| self.theta[i - 1][i - k]).sum());
        }
        Ok(p)
    }

    /// DOC recursion for level `n`, which must be the newest `a` row:
    /// `θ_0 = 1/a^{(n)}_0`, then
    /// `θ^{(n)}_{n-k} = -(1/a^{(k)}_0) Σ_{j=k+1}^n θ^{(n)}_{n-j} a^{(j)}_{j-k}`.
    fn doc_row(&self, n: usize) -> Vec<f64> {
        let mut theta = vec![0.0; n];
        theta[0] = 1.0 / self.a[n - 1][0];
        for k in (1..n).rev() {
            let mut s = 0.0;
            for j in (k + 1)..=n {
                s += theta[n - j] * self.a[j - 1][j - k];
            }
            theta[n - k] = -s / self.a[k - 1][0];
        }
        theta
    }

    /// `p^{(n)}_{n-k} = p^{(n-1)}_{n-1-k} + θ^{(n)}_{n-k}`, `p^{(n)}_0 = θ^{(n)}_0`.
    fn dcc_update(&mut self, theta: &[f64]) {
        let mut next = Vec::with_capacity(theta.len());
        next.push(theta[0]);
        for j in 1..theta.len() {
            next.push(self.p[j - 1] + theta[j]);
        }
        self.p_prev = std::mem::replace(&mut self.p, next);
    }
}

/// Values that can be linearly combined: scalars and grid fields.
pub trait Combination: Sized {
    fn combine(weights: &[f64], items: &[Self]) -> Self;
}

impl Combination for f64 {
    fn combine(weights: &[f64], items: &[f64]) -> f64 {
        weights.iter().zip(items).map(|(w, x)| w * x).sum()
    }
}

/// Discrete Caputo derivative at level `n` from the increments
/// `diffs[k-1] = v^k - v^{k-1}`, `k = 1..=n`.
pub fn caputo_apply<V: Combination>(kset: &KernelSet, n: usize, diffs: &[V]) -> Result<V> {
    if diffs.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: diffs.len(),
        });
    }
    let row = kset.a_row(n)?;
    // increment k pairs with lag n - k
    let weights: Vec<f64> = (1..=n).map(|k| row[n - k]).collect();
    Ok(V::combine(&weights, diffs))
}

/// Largest residuals of the orthogonal and complementary identities over
/// all built levels, plus DCC positivity and sum-bound margins.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize)]
pub struct IdentityReport {
    /// `max |Σ_j θ^{(n)}_{n-j} a^{(j)}_{j-k} - δ_{nk}|`.
    pub orthogonality: f64,
    /// `max |Σ_j p^{(n)}_{n-j} a^{(j)}_{j-k} - 1|`.
    pub complementarity: f64,
    /// `min_{n,j} p^{(n)}_j`.
    pub min_dcc: f64,
    /// `min_n (ω_{1+α}(t_n) - Σ_j p^{(n)}_j) / ω_{1+α}(t_n)`.
    pub sum_bound_margin: f64,
    /// `max_n a^{(n)}_{j+1} / a^{(n)}_j` (below 1 means strictly decaying rows).
    pub max_decay_ratio: f64,
}

/// Audits every identity on a freshly built kernel set.
pub fn identity_report(kset: &KernelSet) -> IdentityReport {
    let alpha = kset.alpha();
    let n_max = kset.levels();
    let mut rep = IdentityReport {
        orthogonality: 0.0,
        complementarity: 0.0,
        min_dcc: f64::INFINITY,
        sum_bound_margin: f64::INFINITY,
        max_decay_ratio: 0.0,
    };
    let mut audit = KernelSet::new(alpha, kset.mesh().clone()).expect("validated alpha");
    for n in 1..=n_max {
        audit.extend().expect("mesh covers the built levels");
        let a = &audit.a;
        let theta = &audit.theta[n - 1];
        let p = audit.p_row();
        for k in 1..=n {
            let mut orth = 0.0;
            let mut comp = 0.0;
            for j in k..=n {
                orth += theta[n - j] * a[j - 1][j - k];
                comp += p[n - j] * a[j - 1][j - k];
            }
            let delta = if k == n { 1.0 } else { 0.0 };
            rep.orthogonality = rep.orthogonality.max((orth - delta).abs());
            rep.complementarity = rep.complementarity.max((comp - 1.0).abs());
        }
        let row = &a[n - 1];
        for w in row.windows(2) {
            rep.max_decay_ratio = rep.max_decay_ratio.max(w[1] / w[0]);
        }
        rep.min_dcc = rep.min_dcc.min(p.iter().copied().fold(f64::INFINITY, f64::min));
        let bound = omega(1.0 + alpha, audit.mesh.t(n));
        let sum: f64 = p.iter().sum();
        rep.sum_bound_margin = rep.sum_bound_margin.min((bound - sum) / bound);
    }
    rep
}
