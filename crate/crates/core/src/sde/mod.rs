//! Euler–Maruyama ensembles for `dX = b_ε(t, X) dt + √2 dW` and Monte Carlo
//! checks of the probabilistic estimates: occupation (Krylov) bounds,
//! exponential moments, the flow determinant, Feynman–Kac duality, martingale
//! defects, densities, weak convergence over mollification levels and restarts.
//!
//! Time integrals along paths are left-endpoint Riemann sums on the
//! simulation grid (trapezoid sums in the duality check), so `∫ 1 dt` is
//! reproduced exactly. Standard errors are batch means over 20 batches.

pub mod density;
pub mod engine;
pub mod feynman_kac;
pub mod format;
pub mod jacobian;
pub mod khasminskii;
pub mod krylov;
pub mod markov;
pub mod martingale;
pub mod rng;
pub mod stats;
pub mod weak_conv;

use serde::{Deserialize, Serialize};

use crate::grid::SpaceTimeField;

pub use engine::{map_paths, simulate, strong_refinement, EnsembleConfig, TrajectoryEnsemble, Walker};
pub use stats::Estimate;

/// Outcome of one Monte Carlo check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateReport {
    pub name: String,
    pub estimate: Estimate,
    /// Value the estimate is compared with (closed form, PDE value or bound).
    pub target: f64,
    /// Discretization allowance added to `3·se`.
    pub allowance: f64,
    pub pass: bool,
    pub meta: serde_json::Value,
}

impl EstimateReport {
    /// Two-sided comparison `|estimate − target| ≤ 3·se + allowance`.
    pub fn compare(name: &str, estimate: Estimate, target: f64, allowance: f64, meta: serde_json::Value) -> Self {
        Self {
            name: name.to_string(),
            pass: estimate.within(target, 3.0, allowance),
            estimate,
            target,
            allowance,
            meta,
        }
    }
}

/// Evaluate a scalar grid field at `(t, x)` (periodic in space, clamped in time).
pub fn field_value(f: &SpaceTimeField, t: f64, x: &[f64]) -> f64 {
    let mut out = [0.0];
    f.interpolate(t, x, &mut out);
    out[0]
}
