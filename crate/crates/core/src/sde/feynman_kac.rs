//! Duality between the backward equation and path integrals:
//! `u(s, x) = E ∫_s^T f(t, X_t^{s,x}) dt` for the backward solution `u`.
//!
//! Each panel cell compares the PDE value with a Monte Carlo estimate within
//! `3·se + C_disc (dt^{1/2} + h²)`, where `C_disc` is fitted from the gap
//! between the PDE on `N` and `2N` points per axis.

use serde::{Deserialize, Serialize};

use crate::drift::DriftField;
use crate::error::{Error, Result};
use crate::grid::SpaceTimeField;
use crate::pde::{Direction, SolutionBundle};

use super::engine::{map_paths, EnsembleConfig};
use super::field_value;
use super::stats::Estimate;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FkConfig {
    /// Panel of `(s, x)` points.
    pub panel: Vec<(f64, Vec<f64>)>,
    pub dt: f64,
    pub paths: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FkCell {
    pub s: f64,
    pub x: Vec<f64>,
    pub pde: f64,
    pub mc: Estimate,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FkReport {
    pub c_disc: f64,
    pub allowance: f64,
    pub cells: Vec<FkCell>,
    pub pass: bool,
}

impl FkReport {
    /// Largest `|pde − mc| / tolerance` over the panel.
    pub fn worst_ratio(&self) -> f64 {
        self.cells
            .iter()
            .map(|c| (c.pde - c.mc.mean).abs() / c.tolerance.max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }
}

/// `E ∫_s^T f(t, X_t) dt` from `(s, x)` (trapezoid rule along each path).
pub fn path_integral(drift: &DriftField, f: &SpaceTimeField, s: f64, x: &[f64], horizon: f64, dt: f64, paths: usize, seed: u64) -> Result<Estimate> {
    if s >= horizon {
        return Ok(Estimate::exact(0.0));
    }
    let mut cfg = EnsembleConfig::new(x.to_vec(), horizon, dt, paths, seed);
    cfg.start_time = s;
    let sums = map_paths(&cfg, drift, |_, mut w| {
        let mut prev = field_value(f, w.time(), w.state());
        let mut acc = 0.0;
        while !w.done() {
            w.step()?;
            let next = field_value(f, w.time(), w.state());
            acc += 0.5 * (prev + next) * w.dt();
            prev = next;
        }
        Ok(acc)
    })?;
    Ok(Estimate::from_samples(&sums))
}

/// `C_disc = max_panel |u_N − u_{2N}| / (dt^{1/2} + h_N²)`.
pub fn fit_disc_constant(coarse: &SolutionBundle, fine: &SolutionBundle, panel: &[(f64, Vec<f64>)], dt: f64) -> f64 {
    let h = coarse.grid().h();
    let gap = panel
        .iter()
        .map(|(s, x)| (coarse.eval(*s, x) - fine.eval(*s, x)).abs())
        .fold(0.0, f64::max);
    gap / (dt.sqrt() + h * h)
}

/// Compare the backward solution `solution` (drift `drift`, source `f`) with
/// path integrals on the panel.
pub fn feynman_kac_check(
    solution: &SolutionBundle,
    drift: &DriftField,
    f: &SpaceTimeField,
    c_disc: f64,
    cfg: &FkConfig,
) -> Result<FkReport> {
    if solution.meta.direction != Direction::Backward {
        return Err(Error::InvalidArgument("duality needs the backward solution".into()));
    }
    let g = *solution.grid();
    if f.grid() != &g {
        return Err(Error::ShapeMismatch("source and solution grids differ".into()));
    }
    let h = g.h();
    let allowance = c_disc * (cfg.dt.sqrt() + h * h);
    let mut cells = Vec::with_capacity(cfg.panel.len());
    for (i, (s, x)) in cfg.panel.iter().enumerate() {
        if *s < g.time_start || *s > g.time_end {
            return Err(Error::InvalidArgument(format!("panel time {s} outside the solution window")));
        }
        let mc = path_integral(drift, f, *s, x, g.time_end, cfg.dt, cfg.paths, cfg.seed.wrapping_add(i as u64))?;
        let pde = solution.eval(*s, x);
        // the floor absorbs the linear solver tolerance when both sides are exact
        let tolerance = 3.0 * mc.se + allowance + 1e-8 * (1.0 + pde.abs());
        cells.push(FkCell {
            s: *s,
            x: x.clone(),
            pde,
            pass: (pde - mc.mean).abs() <= tolerance,
            mc,
            tolerance,
        });
    }
    Ok(FkReport {
        c_disc,
        allowance,
        pass: cells.iter().all(|c| c.pass),
        cells,
    })
}

/// `3 × 3` panel: times `t₀ + (T − t₀){0, 1/3, 2/3}` and points `0, ±r e₁`.
pub fn standard_panel(dim: usize, t0: f64, horizon: f64, r: f64) -> Vec<(f64, Vec<f64>)> {
    let mut out = Vec::with_capacity(9);
    for k in 0..3 {
        let s = t0 + (horizon - t0) * k as f64 / 3.0;
        for sign in [0.0, 1.0, -1.0] {
            let mut x = vec![0.0; dim];
            x[0] = sign * r;
            out.push((s, x));
        }
    }
    out
}
