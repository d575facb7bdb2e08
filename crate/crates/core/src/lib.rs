//! Numerical toolkit for quantum systems that carry one time variable per
//! particle.
//!
//! The library covers four layers of machinery:
//!
//! * [`kernels`] — exact single-interval propagators (free, constant-force,
//!   semiclassical) together with their composition by regularized
//!   oscillatory quadrature and the short-time delta-limit check.
//! * [`wavegrid`] / [`evolution`] — periodic spatial grids, one- and
//!   two-particle wave fields, and split-step spectral evolution along one
//!   time axis at a time, including path-dependence and loop diagnostics on
//!   the plane of time variables.
//! * [`timepaths`] / [`wilson`] — staircase paths and loops in the space of
//!   time variables, and the operator-level counterparts: ordered
//!   exponentials (Wilson lines), curvature of the time connection, loop
//!   holonomy, and a small-rectangle Stokes comparison.
//! * [`consistency`] / [`pathint`] — classical compatibility residuals for
//!   families of Lagrangians and Hamiltonians, action integrals along
//!   sampled trajectories, and a time-sliced path-integral propagator that
//!   converges to the closed forms.
//!
//! Everything is deterministic: no operation uses randomness or
//! nondeterministic parallelism, so identical inputs give bit-identical
//! results. Natural units with hbar = 1 throughout.

pub mod consistency;
pub mod evolution;
pub mod expr;
pub mod kernels;
mod linalg;
pub mod pathint;
pub mod timepaths;
pub mod wavegrid;
pub mod wilson;

pub use kernels::{KernelSpec, QuadratureSpec};
pub use timepaths::{AxisStep, StaircasePath, TimePoint};
pub use wavegrid::{SpatialGrid, WaveField1, WaveField2};
