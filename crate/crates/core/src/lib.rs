//! Numerical laboratory for stochastic Lagrangian paths driven by
//! supercritical singular drifts.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`]: periodic space-time grids, grid functions and the SDLF
//!   binary field format.
//! * [`norms`]: Bessel-potential and mixed `L^q(L^p)` norms, parabolic
//!   cutoffs, localized norms, mollifiers and an inequality battery.
//! * [`drift`]: radial and lattice singular drifts, ingested fields,
//!   mollification and admissibility checks.
//! * [`pde`]: a monotone solver for `∂t u = Δu + b·∇u + f` with energy
//!   monitoring and mollification sweeps.
//! * [`degiorgi`]: the level-set iteration as an executable diagnostic.
//! * [`sde`]: Euler–Maruyama ensembles and Monte Carlo verifiers.
//! * [`experiment`]: config-driven scenario runner used by the `sdlab` binary.

pub mod degiorgi;
pub mod drift;
pub mod error;
pub mod experiment;
pub mod fft;
pub mod grid;
pub mod norms;
pub mod pde;
pub mod sde;

pub use error::{Error, Result};
pub use grid::{GridSpec, SpaceTimeField};
