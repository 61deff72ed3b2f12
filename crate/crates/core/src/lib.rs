//! Variable-step L1 time stepping for the time-fractional molecular beam
//! epitaxy (MBE) model with slope selection,
//!
//! ```text
//! ∂_t^α φ = -κ μ,   μ = ε² Δ²φ - ∇·f(∇φ),   f(v) = (|v|² - 1) v,
//! ```
//!
//! on a periodic square, discretized by a Fourier pseudo-spectral method in
//! space and the nonuniform L1 formula for the Caputo derivative in time.
//!
//! Module map:
//!
//! * [`timemesh`]: uniform, graded, graded+random and growable time meshes.
//! * [`kernels`]: L1 kernels, their orthogonal (DOC) and complementary (DCC)
//!   companions, the discrete Caputo operator, Mittag-Leffler and step bounds.
//! * [`spectral`]: periodic collocation grid and spectral differential operators.
//! * [`model`]: flux, chemical potential, free and variational energies.
//! * [`stepper`]: the implicit L1, convex-splitting and backward Euler steps,
//!   adaptive step selection, full runs and checkpoints.
//! * [`harness`]: convergence studies, coarsening runs and record emission.

pub mod error;
pub mod harness;
pub mod kernels;
pub mod model;
pub mod quadrature;
pub mod spectral;
pub mod stepper;
pub mod timemesh;

pub use error::{Error, Result};
pub use kernels::KernelSet;
pub use model::ModelParams;
pub use spectral::{Field, SpectralGrid, VectorField};
pub use stepper::{Scheme, SolverConfig};
pub use timemesh::TimeMesh;
