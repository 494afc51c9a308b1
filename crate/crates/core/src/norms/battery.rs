//! Numerical checks of the interpolation and localization inequalities.
//!
//! Each check returns both sides and the ratio `LHS / RHS`. The constants in
//! these inequalities do not depend on the grid, so a ratio that keeps growing
//! under refinement points at a discretization bug.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Spectral;
use crate::grid::{GridSpec, SpaceTimeField};

use super::localized::localized_norm_default;
use super::{energy_controlled, gn_theta, lp_slice, spacetime_norm, NormSpec};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BatteryEntry {
    pub field: usize,
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct BatteryReport {
    pub entries: Vec<BatteryEntry>,
    /// Exponent pairs `(r, s)` derived from the configured spec that fail
    /// `d/r + 2/s > d/2` (empty when the spec is admissible).
    pub exponent_failures: Vec<(f64, f64)>,
}

impl BatteryReport {
    /// Largest ratio recorded for a check.
    pub fn max_ratio(&self, check: &str) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.check == check)
            .fold(0.0, |m, e| m.max(e.ratio))
    }

    /// Smallest ratio recorded for a check.
    pub fn min_ratio(&self, check: &str) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.check == check)
            .fold(f64::INFINITY, |m, e| m.min(e.ratio))
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BatteryConfig {
    /// Target exponent of the Gagliardo–Nirenberg check.
    pub gn_r: f64,
    /// Spec used for the radius-equivalence check; its radius is the smaller one.
    pub spec: NormSpec,
    pub large_radius: f64,
    /// Indicator check exponents `(p, q)` against `(r, s)`.
    pub indicator: [f64; 4],
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self {
            gn_r: 4.0,
            spec: NormSpec::lebesgue(2.0, 2.0),
            large_radius: 2.0,
            indicator: [4.0, 4.0, 2.0, 2.0],
        }
    }
}

/// `max_t ‖u‖_r / (‖u‖_2^{1−θ} ‖∇u‖_2^θ)` with `θ = d/2 − d/r` (spectral gradient).
pub fn gagliardo_nirenberg(f: &SpaceTimeField, r: f64) -> Result<(f64, f64, f64)> {
    f.require_scalar()?;
    let g = *f.grid();
    let d = g.dim();
    let theta = gn_theta(d, r);
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidArgument(format!("GN exponent r={r} out of range for d={d}")));
    }
    let sp = Spectral::new(&g);
    let vol = g.cell_volume();
    let mut best = (0.0, 0.0, 0.0);
    for k in 0..g.num_slices() {
        let u = f.slice(k, 0);
        let lhs = lp_slice(u, r, vol);
        if lhs == 0.0 {
            continue;
        }
        let mut grad2 = vec![0.0; u.len()];
        for a in 0..d {
            for (s, v) in grad2.iter_mut().zip(sp.derivative(u, a)) {
                *s += v * v;
            }
        }
        let gnorm = (grad2.iter().sum::<f64>() * vol).sqrt();
        let rhs = lp_slice(u, 2.0, vol).powf(1.0 - theta) * gnorm.powf(theta);
        let ratio = lhs / rhs;
        if ratio > best.2 {
            best = (lhs, rhs, ratio);
        }
    }
    Ok(best)
}

/// Localized norms at radii `spec.cutoff_radius` and `large_radius`.
pub fn radius_equivalence(f: &SpaceTimeField, spec: &NormSpec, large_radius: f64) -> Result<(f64, f64)> {
    let small = localized_norm_default(f, spec)?;
    let large = localized_norm_default(f, &spec.with_radius(large_radius))?;
    Ok((small, large))
}

/// `‖1_A‖_{p;q}` against `‖1_A‖_{r;s}^{(r/p)∧(s/q)}` where `A = {f ≠ 0}`.
pub fn indicator_estimate(f: &SpaceTimeField, p: f64, q: f64, r: f64, s: f64) -> Result<(f64, f64)> {
    let ind = f.magnitude().map(|v| if v != 0.0 { 1.0 } else { 0.0 });
    let lhs = spacetime_norm(&ind, &NormSpec::lebesgue(p, q))?;
    let power = (r / p).min(s / q);
    let rhs = spacetime_norm(&ind, &NormSpec::lebesgue(r, s))?.powf(power);
    Ok((lhs, rhs))
}

/// Unit-period lattice of spikes `|x − z|^{-a}`, one per integer point `z`.
///
/// A node sitting on a spike takes the value at distance `h/2`. The field is
/// locally in `L^p` for `a < d/p`, so its localized norms stay bounded while
/// its norm over the whole box grows like `L^{d/p}`.
pub fn spike_lattice(grid: GridSpec, a: f64) -> SpaceTimeField {
    let floor = 0.5 * grid.h();
    SpaceTimeField::from_fn(grid, |_, x| {
        let r2: f64 = x.iter().map(|v| (v - v.round()).powi(2)).sum();
        r2.sqrt().max(floor).powf(-a)
    })
}

/// Run every check on every field.
pub fn inequality_battery(fields: &[SpaceTimeField], cfg: &BatteryConfig) -> Result<BatteryReport> {
    let mut report = BatteryReport::default();
    let Some(first) = fields.first() else {
        return Ok(report);
    };
    if fields.iter().any(|f| f.grid() != first.grid()) {
        return Err(Error::ShapeMismatch("battery fields must share a grid".into()));
    }
    let d = first.grid().dim();
    if cfg.spec.is_admissible(d) {
        let (r, s) = cfg.spec.energy_exponents();
        if !energy_controlled(d, r, s) {
            report.exponent_failures.push((r, s));
        }
    }
    let mut push = |field: usize, check: &str, lhs: f64, rhs: f64| {
        let ratio = if rhs > 0.0 { lhs / rhs } else if lhs == 0.0 { 0.0 } else { f64::INFINITY };
        report.entries.push(BatteryEntry {
            field,
            check: check.to_string(),
            lhs,
            rhs,
            ratio,
        });
    };
    for (i, f) in fields.iter().enumerate() {
        if f.components() == 1 {
            let (l, r, _) = gagliardo_nirenberg(f, cfg.gn_r)?;
            push(i, "gagliardo_nirenberg", l, r);
        }
        let (small, large) = radius_equivalence(f, &cfg.spec, cfg.large_radius)?;
        push(i, "radius_small_over_large", small, large);
        push(i, "radius_large_over_small", large, small);
        let [p, q, r, s] = cfg.indicator;
        let (l, rr) = indicator_estimate(f, p, q, r, s)?;
        push(i, "indicator", l, rr);
    }
    Ok(report)
}
