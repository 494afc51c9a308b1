//! Solutions along a mollification ladder `ε₁ > … > ε_K` of one drift.
//!
//! Reports pairwise `L²([t₀,T] × B_R)` distances, the log-log slope of the
//! consecutive distances against `ε`, the uniform bound
//! `max_ε (‖u_ε‖_∞ + ‖u_ε‖_V)` and the global-maximum ratio
//! `sup|u_ε| / ‖|f‖|_{0,p;q}` per level.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drift::DriftField;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, SpaceTimeField};
use crate::norms::localized::localized_norm_default;
use crate::norms::NormSpec;

use super::{solve, Direction, PdeProblem, SolutionBundle, SolverConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Mollification levels, largest first.
    pub levels: Vec<f64>,
    /// Grid on which the drift is mollified (only its spatial part is used).
    pub drift_grid: GridSpec,
    /// Radius of the ball `B_R` on which distances are measured.
    pub region_radius: f64,
    /// Localized norm of the source in the global-maximum ratio.
    pub source_norm: NormSpec,
    pub direction: Direction,
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityReport {
    pub levels: Vec<f64>,
    pub sup_norms: Vec<f64>,
    pub v_norms: Vec<f64>,
    /// `(i, j, ‖u_i − u_j‖)` for all `i < j`.
    pub distances: Vec<(usize, usize, f64)>,
    /// `‖u_i − u_{i+1}‖`.
    pub consecutive: Vec<f64>,
    pub strictly_decreasing: bool,
    /// Slope of `log ‖u_i − u_{i+1}‖` against `log ε_i`; absent when a distance vanishes.
    pub cauchy_rate: Option<f64>,
    /// `max_ε (‖u_ε‖_∞ + ‖u_ε‖_V)`.
    pub uniform_bound: f64,
    pub source_norm: f64,
    /// `sup|u_ε| / ‖|f‖|` per level.
    pub global_max_constants: Vec<f64>,
}

impl StabilityReport {
    /// `max / min` of the global-maximum ratios over levels.
    pub fn constant_spread(&self) -> f64 {
        let max = self.global_max_constants.iter().fold(0.0, |m: f64, &v| m.max(v));
        let min = self.global_max_constants.iter().fold(f64::INFINITY, |m: f64, &v| m.min(v));
        if min > 0.0 {
            max / min
        } else if max == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    }
}

/// `‖a − b‖_{L²([t₀,T] × B_R(0))}`.
pub fn region_distance(a: &SpaceTimeField, b: &SpaceTimeField, radius: f64) -> Result<f64> {
    let g = *a.grid();
    if b.grid() != &g {
        return Err(Error::ShapeMismatch("distance between fields on different grids".into()));
    }
    let mut x = vec![0.0; g.dim()];
    let inside: Vec<bool> = (0..g.num_nodes())
        .map(|j| {
            g.node_position(j, &mut x);
            x.iter().map(|v| v * v).sum::<f64>() <= radius * radius
        })
        .collect();
    let w = g.time_weights();
    let mut s = 0.0;
    for k in 0..g.num_slices() {
        let acc: f64 = a
            .slice(k, 0)
            .iter()
            .zip(b.slice(k, 0))
            .zip(&inside)
            .filter(|(_, &i)| i)
            .map(|((p, q), _)| (p - q) * (p - q))
            .sum();
        s += w[k] * acc;
    }
    Ok((s * g.cell_volume()).sqrt())
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Solve for every level of `cfg.levels` with the mollified drift and compare.
pub fn stability_sweep(base: &DriftField, source: &SpaceTimeField, cfg: &SweepConfig) -> Result<StabilityReport> {
    if cfg.levels.len() < 2 {
        return Err(Error::InvalidArgument("a stability sweep needs at least two levels".into()));
    }
    let solutions: Vec<SolutionBundle> = cfg
        .levels
        .par_iter()
        .map(|&eps| {
            let b = if base.is_regular() && base.mollification_level().is_none() && eps == 0.0 {
                base.clone()
            } else {
                base.mollify(&cfg.drift_grid, eps)?
            };
            let problem = PdeProblem::new(b, source.clone(), cfg.direction)?;
            solve(&problem, &cfg.solver)
        })
        .collect::<Result<_>>()?;
    compare_levels(&cfg.levels, &solutions, source, cfg.region_radius, &cfg.source_norm)
}

/// Stability report for solutions already computed at `levels`.
pub fn compare_levels(
    levels: &[f64],
    solutions: &[SolutionBundle],
    source: &SpaceTimeField,
    region_radius: f64,
    source_spec: &NormSpec,
) -> Result<StabilityReport> {
    if levels.len() != solutions.len() || levels.len() < 2 {
        return Err(Error::InvalidArgument("need one solution per level and at least two levels".into()));
    }
    let mut distances = Vec::new();
    for i in 0..solutions.len() {
        for j in i + 1..solutions.len() {
            distances.push((i, j, region_distance(&solutions[i].u, &solutions[j].u, region_radius)?));
        }
    }
    let consecutive: Vec<f64> = (0..solutions.len() - 1)
        .map(|i| region_distance(&solutions[i].u, &solutions[i + 1].u, region_radius))
        .collect::<Result<_>>()?;
    let strictly_decreasing = consecutive.windows(2).all(|p| p[1] < p[0]);
    let cauchy_rate = if consecutive.len() >= 2 && consecutive.iter().all(|&d| d > 0.0) {
        let xs: Vec<f64> = levels[..consecutive.len()].iter().map(|e| e.ln()).collect();
        let ys: Vec<f64> = consecutive.iter().map(|d| d.ln()).collect();
        Some(slope(&xs, &ys))
    } else {
        None
    };
    let sup_norms: Vec<f64> = solutions.iter().map(|s| s.sup_norm).collect();
    let v_norms: Vec<f64> = solutions.iter().map(|s| s.v_norm).collect();
    let uniform_bound = sup_norms.iter().zip(&v_norms).map(|(a, b)| a + b).fold(0.0, f64::max);
    let source_norm = localized_norm_default(source, source_spec)?;
    let global_max_constants = sup_norms
        .iter()
        .map(|s| if source_norm > 0.0 { s / source_norm } else { 0.0 })
        .collect();
    Ok(StabilityReport {
        levels: levels.to_vec(),
        sup_norms,
        v_norms,
        distances,
        consecutive,
        strictly_decreasing,
        cauchy_rate,
        uniform_bound,
        source_norm,
        global_max_constants,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(levels: Vec<f64>, g: &GridSpec) -> SweepConfig {
        SweepConfig {
            levels,
            drift_grid: *g,
            region_radius: 1.0,
            source_norm: NormSpec::lebesgue(4.0, 4.0).with_radius(0.5),
            direction: Direction::Forward,
            solver: SolverConfig::default(),
        }
    }

    #[test]
    fn zero_source_gives_zero_distances() {
        let g = GridSpec::new(2, 4.0, 16, 0.0, 0.5, 4).unwrap();
        let f = SpaceTimeField::zeros(g, 1);
        let r = stability_sweep(&DriftField::ornstein_uhlenbeck(2, 1.0), &f, &config(vec![0.8, 0.4, 0.2], &g)).unwrap();
        assert!(r.distances.iter().all(|d| d.2 == 0.0));
        assert!(!r.strictly_decreasing);
        assert!(r.cauchy_rate.is_none());
        assert_eq!(r.uniform_bound, 0.0);
    }

    #[test]
    fn smooth_drift_levels_converge() {
        let g = GridSpec::new(2, 4.0, 32, 0.0, 0.5, 4).unwrap();
        let f = SpaceTimeField::from_fn(g, |_, x| (-(x[0] * x[0] + x[1] * x[1])).exp());
        let b = DriftField::constant(vec![0.5, -0.25]);
        let r = stability_sweep(&b, &f, &config(vec![0.8, 0.4], &g)).unwrap();
        // mollifying a constant field leaves it unchanged
        assert!(r.distances[0].2 < 1e-10, "{}", r.distances[0].2);
    }

    #[test]
    fn region_distance_of_constant_gap() {
        let g = GridSpec::new(1, 4.0, 64, 0.0, 1.0, 4).unwrap();
        let a = SpaceTimeField::from_fn(g, |_, _| 1.0);
        let b = SpaceTimeField::zeros(g, 1);
        // nodes in [−1, 1]: 33 nodes of width 1/16
        let d = region_distance(&a, &b, 1.0).unwrap();
        assert!((d - (33.0f64 / 16.0).sqrt()).abs() < 1e-12);
    }
}
