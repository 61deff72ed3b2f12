//! Binary checkpoints.
//!
//! Layout (little endian): `b"TFMBECKP"`, version byte, scheme byte, `M` u64,
//! `L` f64, `ε²`, `κ`, `α` f64, level `n` u64, mesh points `t_0..=t_n`,
//! `φ⁰`, `φⁿ`, the `n` increments, then `‖μ^j‖²` for `j = 1..=n`.
//! Resuming rebuilds the kernel tables from the stored mesh, so a resumed
//! run reproduces an uninterrupted one bit for bit.

use std::io::{Read, Write};

use super::{Forcing, HistoryBuffer, Scheme, Solver, SolverConfig};
use crate::error::{Error, Result};
use crate::kernels::KernelSet;
use crate::model::ModelParams;
use crate::spectral::{Field, SpectralGrid};
use crate::timemesh::TimeMesh;

pub const CHECKPOINT_VERSION: u8 = 1;
const MAGIC: &[u8; 8] = b"TFMBECKP";

fn put_f64s<W: Write>(out: &mut W, values: &[f64]) -> Result<()> {
    for v in values {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.inner
            .read_exact(&mut b)
            .map_err(|e| Error::Checkpoint(format!("truncated checkpoint: {e}")))?;
        Ok(b)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }

    fn field(&mut self, grid: &SpectralGrid) -> Result<Field> {
        let values = self.f64s(grid.len())?;
        grid.field_from(values)
    }
}

impl Solver {
    pub fn write_checkpoint<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&[CHECKPOINT_VERSION, self.cfg.scheme.tag()])?;
        out.write_all(&(self.grid.m() as u64).to_le_bytes())?;
        put_f64s(
            &mut out,
            &[self.grid.length(), self.params.eps2, self.params.kappa, self.params.alpha],
        )?;
        out.write_all(&(self.level() as u64).to_le_bytes())?;
        put_f64s(&mut out, self.mesh.points())?;
        put_f64s(&mut out, self.phi0.values())?;
        put_f64s(&mut out, self.hist.phi_prev.values())?;
        for inc in &self.hist.increments {
            put_f64s(&mut out, inc.values())?;
        }
        put_f64s(&mut out, &self.mu_norms)?;
        out.flush()?;
        Ok(())
    }

    /// Restores a solver written by [`Solver::write_checkpoint`]. The scheme
    /// recorded in the file must match `cfg.scheme`.
    pub fn resume<R: Read>(input: R, cfg: SolverConfig, forcing: Option<Forcing>) -> Result<Self> {
        let mut r = Reader { inner: input };
        if &r.bytes::<8>()? != MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let version = r.u8()?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let scheme = Scheme::from_tag(r.u8()?).ok_or_else(|| Error::Checkpoint("unknown scheme".into()))?;
        if scheme != cfg.scheme {
            return Err(Error::Checkpoint(format!(
                "checkpoint was written by scheme {}, not {}",
                scheme.name(),
                cfg.scheme.name()
            )));
        }
        let m = r.u64()? as usize;
        let length = r.f64()?;
        let grid = SpectralGrid::new(m, length).map_err(|e| Error::Checkpoint(e.to_string()))?;
        let (eps2, kappa, alpha) = (r.f64()?, r.f64()?, r.f64()?);
        let params = ModelParams::new(eps2, kappa, alpha).map_err(|e| Error::Checkpoint(e.to_string()))?;
        let n = r.u64()? as usize;
        let mesh = TimeMesh::from_points(r.f64s(n + 1)?).map_err(|e| Error::Checkpoint(e.to_string()))?;
        let phi0 = r.field(&grid)?;
        let phi_prev = r.field(&grid)?;
        let increments = (0..n).map(|_| r.field(&grid)).collect::<Result<Vec<_>>>()?;
        let mu_norms = r.f64s(n)?;
        let mut solver = Solver::new(grid, params, cfg, phi0, forcing)?;
        if let Some(k) = solver.kset.as_mut() {
            *k = KernelSet::build(alpha, mesh.clone())?;
        }
        solver.mesh = mesh;
        solver.hist = HistoryBuffer { increments, phi_prev };
        solver.mu_norms = mu_norms;
        Ok(solver)
    }
}
