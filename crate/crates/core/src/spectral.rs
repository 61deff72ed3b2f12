//! Fourier pseudo-spectral discretization on the periodic square `(0, L)²`.
//!
//! Grid functions are stored row-major with x fastest: the value at
//! `(x_i, y_j) = (i h, j h)` lives at index `j * M + i`. Mode `(m, n)` uses
//! the same layout with the FFT ordering `0, 1, ..., M/2-1, -M/2, ..., -1`.
//!
//! First-derivative symbols vanish on the Nyquist mode `-M/2` so derivatives
//! of real fields stay real; second-derivative symbols keep it.

use std::io::{BufRead, Read, Write};
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::kernels::Combination;

pub type Spectrum = Vec<Complex64>;

#[derive(Clone)]
pub struct SpectralGrid {
    m: usize,
    length: f64,
    forward: Arc<dyn Fft<f64>>,
    backward: Arc<dyn Fft<f64>>,
    /// ν m per axis index, zero at Nyquist.
    k1: Vec<f64>,
    /// ν² m² per axis index.
    k2: Vec<f64>,
}

impl std::fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("m", &self.m)
            .field("length", &self.length)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.length == other.length
    }
}

impl SpectralGrid {
    /// `M` points per axis on a square of edge `length`. `M` must be even and ≥ 4.
    pub fn new(m: usize, length: f64) -> Result<Self> {
        if m < 4 || m % 2 != 0 {
            return Err(Error::InvalidArgument(format!("grid size {m} must be even and ≥ 4")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidArgument(format!("domain length {length} must be > 0")));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(m);
        let backward = planner.plan_fft_inverse(m);
        let nu = 2.0 * std::f64::consts::PI / length;
        let modes: Vec<i64> = (0..m as i64)
            .map(|i| if i < m as i64 / 2 { i } else { i - m as i64 })
            .collect();
        let k1 = modes
            .iter()
            .map(|&q| if q == -(m as i64) / 2 { 0.0 } else { nu * q as f64 })
            .collect();
        let k2 = modes.iter().map(|&q| (nu * q as f64).powi(2)).collect();
        Ok(Self {
            m,
            length,
            forward,
            backward,
            k1,
            k2,
        })
    }

    /// The `(0, 2π)²` grid used by all the experiments.
    pub fn periodic_2pi(m: usize) -> Result<Self> {
        Self::new(m, 2.0 * std::f64::consts::PI)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.m as f64
    }

    /// Base wavenumber ν = 2π/L.
    pub fn nu(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.length
    }

    /// `|Ω_h| = L²`.
    pub fn area(&self) -> f64 {
        self.length * self.length
    }

    pub fn len(&self) -> usize {
        self.m * self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Collocation point of flat index `idx`.
    pub fn point(&self, idx: usize) -> (f64, f64) {
        let h = self.spacing();
        ((idx % self.m) as f64 * h, (idx / self.m) as f64 * h)
    }

    pub fn zeros(&self) -> Field {
        Field {
            m: self.m,
            length: self.length,
            values: vec![0.0; self.len()],
        }
    }

    pub fn constant(&self, c: f64) -> Field {
        Field {
            m: self.m,
            length: self.length,
            values: vec![c; self.len()],
        }
    }

    pub fn field_from(&self, values: Vec<f64>) -> Result<Field> {
        if values.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("field value {v}")));
        }
        Ok(Field {
            m: self.m,
            length: self.length,
            values,
        })
    }

    /// Samples `phi0` at the collocation points (trigonometric interpolation).
    pub fn project<F: Fn(f64, f64) -> f64>(&self, phi0: F) -> Result<Field> {
        let values = (0..self.len())
            .map(|idx| {
                let (x, y) = self.point(idx);
                phi0(x, y)
            })
            .collect();
        self.field_from(values)
    }

    pub fn check(&self, u: &Field) -> Result<()> {
        if u.m == self.m && u.length == self.length {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    fn transpose(&self, buf: &mut [Complex64]) {
        let m = self.m;
        for j in 0..m {
            for i in (j + 1)..m {
                buf.swap(j * m + i, i * m + j);
            }
        }
    }

    fn fft2(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        plan.process(buf);
        self.transpose(buf);
        plan.process(buf);
        self.transpose(buf);
    }

    /// Pseudo-spectral coefficients (unnormalized DFT).
    pub fn forward(&self, u: &Field) -> Spectrum {
        let mut buf: Spectrum = u.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft2(&mut buf, &self.forward);
        buf
    }

    /// Transform of the complex grid function `re + i im`.
    fn forward_pair(&self, re: &[f64], im: &[f64]) -> Spectrum {
        let mut buf: Spectrum = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        self.fft2(&mut buf, &self.forward);
        buf
    }

    /// Inverse transform returning the full complex grid function.
    fn backward_complex(&self, mut spec: Spectrum) -> Spectrum {
        self.fft2(&mut spec, &self.backward);
        let scale = 1.0 / self.len() as f64;
        for z in spec.iter_mut() {
            *z *= scale;
        }
        spec
    }

    /// Inverse transform; the imaginary part (roundoff for Hermitian input) is dropped.
    pub fn inverse(&self, spec: Spectrum) -> Field {
        let values = self.backward_complex(spec).into_iter().map(|z| z.re).collect();
        Field {
            m: self.m,
            length: self.length,
            values,
        }
    }

    /// Mode numbers `(ν m, ν n)` of flat index `idx` for first derivatives.
    pub fn first_symbol(&self, idx: usize) -> (f64, f64) {
        (self.k1[idx % self.m], self.k1[idx / self.m])
    }

    /// `ν²(m² + n²)`, i.e. minus the Laplacian symbol.
    pub fn neg_laplacian_symbol(&self, idx: usize) -> f64 {
        self.k2[idx % self.m] + self.k2[idx / self.m]
    }

    /// Minus the symbol of `∇_h·∇_h` (Nyquist rows/columns dropped).
    pub fn neg_div_grad_symbol(&self, idx: usize) -> f64 {
        let (a, b) = self.first_symbol(idx);
        a * a + b * b
    }

    /// Gradient in transform space: `(i ν m û, i ν n û)`.
    pub fn grad_spectral(&self, u_hat: &[Complex64]) -> VectorField {
        // both derivatives are real, so pack them as ∂x + i ∂y
        let packed: Spectrum = u_hat
            .iter()
            .enumerate()
            .map(|(idx, &z)| {
                let (kx, ky) = self.first_symbol(idx);
                let dx = Complex64::new(0.0, kx) * z;
                let dy = Complex64::new(0.0, ky) * z;
                dx + Complex64::new(0.0, 1.0) * dy
            })
            .collect();
        let both = self.backward_complex(packed);
        let (x, y) = both.iter().map(|z| (z.re, z.im)).unzip();
        VectorField {
            x: Field {
                m: self.m,
                length: self.length,
                values: x,
            },
            y: Field {
                m: self.m,
                length: self.length,
                values: y,
            },
        }
    }

    pub fn grad(&self, u: &Field) -> VectorField {
        self.grad_spectral(&self.forward(u))
    }

    /// Divergence in transform space: `i ν m ŵx + i ν n ŵy`.
    pub fn div_spectral(&self, w: &VectorField) -> Spectrum {
        let z = self.forward_pair(&w.x.values, &w.y.values);
        let m = self.m;
        let mirror = |idx: usize| {
            let (i, j) = (idx % m, idx / m);
            ((m - j) % m) * m + (m - i) % m
        };
        (0..z.len())
            .map(|idx| {
                let zc = z[mirror(idx)].conj();
                let wx = (z[idx] + zc) * 0.5;
                let wy = (z[idx] - zc) * Complex64::new(0.0, -0.5);
                let (kx, ky) = self.first_symbol(idx);
                Complex64::new(0.0, kx) * wx + Complex64::new(0.0, ky) * wy
            })
            .collect()
    }

    pub fn div(&self, w: &VectorField) -> Result<Field> {
        self.check(&w.x)?;
        self.check(&w.y)?;
        Ok(self.inverse(self.div_spectral(w)))
    }

    pub fn laplacian(&self, u: &Field) -> Field {
        let mut s = self.forward(u);
        for (idx, z) in s.iter_mut().enumerate() {
            *z *= -self.neg_laplacian_symbol(idx);
        }
        self.inverse(s)
    }

    pub fn bilaplacian(&self, u: &Field) -> Field {
        let mut s = self.forward(u);
        for (idx, z) in s.iter_mut().enumerate() {
            *z *= self.neg_laplacian_symbol(idx).powi(2);
        }
        self.inverse(s)
    }

    /// Zeroes every mode with `|m|` or `|n|` above `M/3` (2/3 rule).
    pub fn dealias(&self, spec: &mut [Complex64]) {
        let cutoff = self.m as i64 / 3;
        let m = self.m as i64;
        let mode = |i: i64| if i < m / 2 { i } else { i - m };
        for (idx, z) in spec.iter_mut().enumerate() {
            let (i, j) = (idx as i64 % m, idx as i64 / m);
            if mode(i).abs() > cutoff || mode(j).abs() > cutoff {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// `⟨u, v⟩ = h² Σ u v`.
    pub fn inner(&self, u: &Field, v: &Field) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.inner_unchecked(&u.values, &v.values))
    }

    fn inner_unchecked(&self, u: &[f64], v: &[f64]) -> f64 {
        let h = self.spacing();
        h * h * u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Inner product of vector fields, `⟨u_x, v_x⟩ + ⟨u_y, v_y⟩`.
    pub fn inner_vec(&self, u: &VectorField, v: &VectorField) -> Result<f64> {
        Ok(self.inner(&u.x, &v.x)? + self.inner(&u.y, &v.y)?)
    }

    /// Discrete L² norm.
    pub fn norm(&self, u: &Field) -> f64 {
        self.inner_unchecked(&u.values, &u.values).sqrt()
    }

    /// `(h² Σ |u|^p)^{1/p}`.
    pub fn lp_norm(&self, u: &Field, p: f64) -> f64 {
        let h = self.spacing();
        (h * h * u.values.iter().map(|v| v.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
    }

    pub fn norms(&self, u: &Field) -> Norms {
        let l2 = self.norm(u);
        let g = self.grad(u);
        let grad2 = self.norm(&g.x).powi(2) + self.norm(&g.y).powi(2);
        let lap2 = self.norm(&self.laplacian(u)).powi(2);
        let h1 = (l2 * l2 + grad2).sqrt();
        Norms {
            l2,
            h1,
            h2: (h1 * h1 + lap2).sqrt(),
            linf: u.values.iter().fold(0.0, |a, v| a.max(v.abs())),
        }
    }

    /// `⟨u, 1⟩`.
    pub fn volume(&self, u: &Field) -> f64 {
        let h = self.spacing();
        h * h * u.values.iter().sum::<f64>()
    }

    /// Mode-space inner product `(L²/M⁴) Σ û conj(v̂)`, equal to `⟨u, v⟩` by Parseval.
    pub fn inner_spectral(&self, u_hat: &[Complex64], v_hat: &[Complex64]) -> f64 {
        let s: f64 = u_hat.iter().zip(v_hat).map(|(a, b)| (a * b.conj()).re).sum();
        s * self.area() / (self.len() as f64).powi(2)
    }
}

/// Discrete norms of a field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub h1: f64,
    pub h2: f64,
    pub linf: f64,
}

/// A real grid function.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    m: usize,
    length: f64,
    values: Vec<f64>,
}

impl Field {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    fn same_grid(&self, other: &Field) -> bool {
        self.m == other.m && self.length == other.length
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &Field) {
        debug_assert!(self.same_grid(x));
        for (s, v) in self.values.iter_mut().zip(&x.values) {
            *s += a * v;
        }
    }

    pub fn scaled(&self, a: f64) -> Field {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= a);
        out
    }

    pub fn sub(&self, other: &Field) -> Field {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn add(&self, other: &Field) -> Field {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |a, (x, y)| a.max((x - y).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// CSV matrix: M rows (y index j) by M columns (x index i), full precision.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for row in self.values.chunks(self.m) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(grid: &SpectralGrid, input: R) -> Result<Field> {
        let mut values = Vec::with_capacity(grid.len());
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            for tok in line.split(',') {
                values.push(
                    tok.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::InvalidArgument(format!("bad CSV value {tok:?}: {e}")))?,
                );
            }
        }
        grid.field_from(values)
    }

    /// Binary snapshot: `b"TFMF"`, version byte 1, `M` as u64 LE, `L` as
    /// f64 LE, then M² f64 LE values in storage order.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(b"TFMF")?;
        out.write_all(&[1u8])?;
        out.write_all(&(self.m as u64).to_le_bytes())?;
        out.write_all(&self.length.to_le_bytes())?;
        for v in &self.values {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<(SpectralGrid, Field)> {
        let mut magic = [0u8; 5];
        input.read_exact(&mut magic)?;
        if &magic[..4] != b"TFMF" || magic[4] != 1 {
            return Err(Error::InvalidArgument("not a version-1 field snapshot".into()));
        }
        let mut b8 = [0u8; 8];
        input.read_exact(&mut b8)?;
        let m = u64::from_le_bytes(b8) as usize;
        input.read_exact(&mut b8)?;
        let length = f64::from_le_bytes(b8);
        let grid = SpectralGrid::new(m, length)?;
        let mut values = Vec::with_capacity(m * m);
        for _ in 0..m * m {
            input.read_exact(&mut b8)?;
            values.push(f64::from_le_bytes(b8));
        }
        let field = grid.field_from(values)?;
        Ok((grid, field))
    }
}

impl Combination for Field {
    fn combine(weights: &[f64], items: &[Field]) -> Field {
        let first = items.first().expect("at least one field");
        let mut out = Field {
            m: first.m,
            length: first.length,
            values: vec![0.0; first.values.len()],
        };
        for (w, f) in weights.iter().zip(items) {
            out.axpy(*w, f);
        }
        out
    }
}

/// A pair of fields on one grid, e.g. `∇_h φ`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub x: Field,
    pub y: Field,
}

impl VectorField {
    pub fn new(x: Field, y: Field) -> Result<Self> {
        if !x.same_grid(&y) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { x, y })
    }

    /// Pointwise `|w|²`.
    pub fn magnitude_squared(&self) -> Vec<f64> {
        self.x
            .values
            .iter()
            .zip(&self.y.values)
            .map(|(a, b)| a * a + b * b)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_band_limited(grid: &SpectralGrid, modes: i32, seed: u64) -> Field {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut terms = Vec::new();
        for p in -modes..=modes {
            for q in -modes..=modes {
                terms.push((p as f64, q as f64, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            }
        }
        let nu = grid.nu();
        grid.project(|x, y| {
            terms
                .iter()
                .map(|&(p, q, a, b)| a * (nu * (p * x + q * y)).cos() + b * (nu * (p * x + q * y)).sin())
                .sum()
        })
        .unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(SpectralGrid::new(7, 1.0).is_err());
        assert!(SpectralGrid::new(2, 1.0).is_err());
        assert!(SpectralGrid::new(8, 0.0).is_err());
    }

    #[test]
    fn derivative_of_sine() {
        let g = SpectralGrid::periodic_2pi(16).unwrap();
        let u = g.project(|x, _| x.sin()).unwrap();
        let du = g.grad(&u);
        let expect = g.project(|x, _| x.cos()).unwrap();
        assert!(du.x.max_abs_diff(&expect) < 1e-12);
        assert!(du.y.values().iter().all(|v| v.abs() < 1e-12));
        let c = g.grad(&g.constant(3.0));
        assert!(c.x.values().iter().chain(c.y.values()).all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn gradient_of_product_mode() {
        let g = SpectralGrid::periodic_2pi(16).unwrap();
        let u = g.project(|x, y| (3.0 * x).sin() * (2.0 * y).sin()).unwrap();
        let du = g.grad(&u);
        let ex = g.project(|x, y| 3.0 * (3.0 * x).cos() * (2.0 * y).sin()).unwrap();
        let ey = g.project(|x, y| 2.0 * (3.0 * x).sin() * (2.0 * y).cos()).unwrap();
        assert!(du.x.max_abs_diff(&ex) < 1e-12);
        assert!(du.y.max_abs_diff(&ey) < 1e-12);
    }

    #[test]
    fn eigenfunctions() {
        let g = SpectralGrid::periodic_2pi(16).unwrap();
        let u = g.project(|x, y| x.sin() * y.sin()).unwrap();
        assert!(g.laplacian(&u).max_abs_diff(&u.scaled(-2.0)) < 1e-12);
        assert!(g.bilaplacian(&u).max_abs_diff(&u.scaled(4.0)) < 1e-12);
    }

    #[test]
    fn operator_compositions() {
        let g = SpectralGrid::new(16, 3.0).unwrap();
        let u = random_band_limited(&g, 5, 1);
        let dg = g.div(&g.grad(&u)).unwrap();
        assert!(dg.max_abs_diff(&g.laplacian(&u)) < 1e-11 * 50.0);
        let ll = g.laplacian(&g.laplacian(&u));
        let scale = ll.values().iter().fold(1.0f64, |a, v| a.max(v.abs()));
        assert!(g.bilaplacian(&u).max_abs_diff(&ll) < 1e-11 * scale);
    }

    #[test]
    fn green_formulas() {
        let g = SpectralGrid::periodic_2pi(32).unwrap();
        let v = random_band_limited(&g, 6, 2);
        let w = random_band_limited(&g, 6, 3);
        let lhs = -g.inner(&g.laplacian(&v), &w).unwrap();
        let rhs = g.inner_vec(&g.grad(&v), &g.grad(&w)).unwrap();
        assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
        let lhs = g.inner(&g.bilaplacian(&v), &w).unwrap();
        let rhs = g.inner(&g.laplacian(&v), &g.laplacian(&w)).unwrap();
        assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
    }

    #[test]
    fn inner_products_and_norms() {
        let g = SpectralGrid::periodic_2pi(16).unwrap();
        let one = g.constant(1.0);
        assert!((g.inner(&one, &one).unwrap() - g.area()).abs() < 1e-12);
        let s = g.project(|x, _| x.sin()).unwrap();
        assert!((g.norm(&s).powi(2) - g.area() / 2.0).abs() < 1e-12);
        let u = random_band_limited(&g, 4, 4);
        let v = random_band_limited(&g, 4, 5);
        let phys = g.inner(&u, &v).unwrap();
        let spec = g.inner_spectral(&g.forward(&u), &g.forward(&v));
        assert!((phys - spec).abs() < 1e-12 * phys.abs().max(1.0));
        let n = g.norms(&s);
        assert!((n.h1.powi(2) - g.area()).abs() < 1e-10);
        assert!((g.lp_norm(&s, 2.0) - n.l2).abs() < 1e-13);
        let other = SpectralGrid::periodic_2pi(8).unwrap();
        assert!(matches!(g.inner(&u, &other.zeros()), Err(Error::GridMismatch)));
    }

    #[test]
    fn round_trip_transform() {
        let g = SpectralGrid::periodic_2pi(32).unwrap();
        let u = random_band_limited(&g, 15, 6);
        let back = g.inverse(g.forward(&u));
        assert!(back.max_abs_diff(&u) < 1e-13);
    }

    #[test]
    fn projection_reproduces_nodes() {
        let g = SpectralGrid::periodic_2pi(16).unwrap();
        let f = |x: f64, y: f64| 0.1 * ((3.0 * x).sin() * (2.0 * y).sin() + (5.0 * x).sin() * (5.0 * y).sin());
        let u = g.project(f).unwrap();
        for idx in [0, 17, 100, 255] {
            let (x, y) = g.point(idx);
            assert_eq!(u.values()[idx], f(x, y));
        }
        assert!(g.project(|_, _| 2.5).unwrap().values().iter().all(|&v| v == 2.5));
        assert!(g.project(|x, _| 1.0 / x).is_err());
    }

    #[test]
    fn snapshot_formats() {
        let g = SpectralGrid::new(8, 2.0).unwrap();
        let u = random_band_limited(&g, 3, 8);
        let mut csv = Vec::new();
        u.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8_lossy(&csv).lines().count(), 8);
        assert_eq!(Field::read_csv(&g, csv.as_slice()).unwrap(), u);
        let mut bin = Vec::new();
        u.write_binary(&mut bin).unwrap();
        assert_eq!(bin.len(), 5 + 16 + 8 * 64);
        let (g2, u2) = Field::read_binary(bin.as_slice()).unwrap();
        assert_eq!(g2, g);
        assert_eq!(u2, u);
    }

    #[test]
    fn nyquist_first_derivative_vanishes() {
        let g = SpectralGrid::periodic_2pi(8).unwrap();
        // cos(4x) is the pure Nyquist mode in x
        let u = g.project(|x, _| (4.0 * x).cos()).unwrap();
        assert!(g.grad(&u).x.values().iter().all(|v| v.abs() < 1e-12));
        assert!(g.laplacian(&u).max_abs_diff(&u.scaled(-16.0)) < 1e-11);
    }
}
