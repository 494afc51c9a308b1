//! Density of `X_t` from an ensemble: nearest-node histograms on a grid,
//! Gaussian kernel estimates of marginals, Kolmogorov–Smirnov tests and
//! ball masses.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, SpaceTimeField};
use crate::norms::slice_norms;

use super::engine::TrajectoryEnsemble;
use super::stats::{ks_critical, ks_distance, Estimate};

#[derive(Debug, Clone)]
pub struct DensityEstimate {
    pub time: f64,
    pub samples: usize,
    /// Histogram density on the spatial grid, stored as two equal time slices.
    pub histogram: SpaceTimeField,
    /// Fraction of samples outside the box (not binned).
    pub outside_fraction: f64,
    /// `‖(I − Δ)^{α/2} ρ‖_{p'}` of the histogram when requested.
    pub dual_norm: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub axis: usize,
    pub distance: f64,
    pub critical: f64,
    pub pass: bool,
}

fn record(ens: &TrajectoryEnsemble, t: f64) -> Result<usize> {
    ens.record_of(t).ok_or(Error::NotGridTime(t))
}

/// Histogram of `X_t` on the spatial part of `grid` (cells centered at nodes),
/// with the dual-exponent norm `(α, p')` when given.
pub fn density_estimate(ens: &TrajectoryEnsemble, t: f64, grid: &GridSpec, dual: Option<(f64, f64)>) -> Result<DensityEstimate> {
    let r = record(ens, t)?;
    if grid.dim() != ens.dim() {
        return Err(Error::ShapeMismatch("density grid and ensemble dimensions differ".into()));
    }
    let g = grid.with_time(t, t + 1.0, 1)?;
    let h = g.h();
    let half = 0.5 * g.extent;
    let n = g.n();
    let mut counts = vec![0.0; g.num_nodes()];
    let mut outside = 0usize;
    let mut idx = vec![0usize; g.dim()];
    for x in ens.marginal(r) {
        let mut inside = true;
        for (i, v) in idx.iter_mut().zip(x) {
            let j = ((v + half) / h).round();
            // the last half cell wraps onto node 0 only for in-box points
            if !(-half - 0.5 * h..half - 0.5 * h).contains(v) {
                inside = false;
                break;
            }
            *i = (j as usize) % n;
        }
        if inside {
            counts[g.flatten(&idx)] += 1.0;
        } else {
            outside += 1;
        }
    }
    let m = ens.paths() as f64;
    let scale = 1.0 / (m * g.cell_volume());
    let slice: Vec<f64> = counts.iter().map(|c| c * scale).collect();
    let mut values = slice.clone();
    values.extend_from_slice(&slice);
    let histogram = SpaceTimeField::from_values(g, 1, values)?;
    let dual_norm = match dual {
        Some((alpha, p)) => Some(slice_norms(&histogram, alpha, p)?[0]),
        None => None,
    };
    Ok(DensityEstimate {
        time: t,
        samples: ens.paths(),
        histogram,
        outside_fraction: outside as f64 / m,
        dual_norm,
    })
}

/// Silverman's rule `1.06 σ̂ n^{−1/5}`.
pub fn silverman_bandwidth(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    1.06 * var.sqrt() * n.powf(-0.2)
}

/// Gaussian kernel density estimate of one-dimensional samples at `points`.
pub fn kde(samples: &[f64], points: &[f64], bandwidth: f64) -> Vec<f64> {
    let norm = 1.0 / (samples.len() as f64 * bandwidth * (2.0 * std::f64::consts::PI).sqrt());
    points
        .iter()
        .map(|&y| samples.iter().map(|&x| (-0.5 * ((y - x) / bandwidth).powi(2)).exp()).sum::<f64>() * norm)
        .collect()
}

/// Coordinate `axis` of `X_t` over all paths.
pub fn marginal_samples(ens: &TrajectoryEnsemble, t: f64, axis: usize) -> Result<Vec<f64>> {
    let r = record(ens, t)?;
    Ok(ens.marginal(r).iter().map(|x| x[axis]).collect())
}

/// KS test of every marginal of `X_t` against normal laws `N(means[a], vars[a])`.
pub fn ks_normal_marginals(ens: &TrajectoryEnsemble, t: f64, means: &[f64], vars: &[f64], alpha: f64) -> Result<Vec<KsResult>> {
    if means.len() != ens.dim() || vars.len() != ens.dim() {
        return Err(Error::ShapeMismatch("one mean and variance per coordinate".into()));
    }
    let critical = ks_critical(ens.paths(), alpha);
    (0..ens.dim())
        .map(|a| {
            let law = Normal::new(means[a], vars[a].sqrt()).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            let distance = ks_distance(&marginal_samples(ens, t, a)?, |x| law.cdf(x));
            Ok(KsResult {
                axis: a,
                distance,
                critical,
                pass: distance <= critical,
            })
        })
        .collect()
}

/// `P(|X_t − center| ≤ radius)`.
pub fn mass_within(ens: &TrajectoryEnsemble, t: f64, center: &[f64], radius: f64) -> Result<Estimate> {
    let r = record(ens, t)?;
    let ind: Vec<f64> = ens
        .marginal(r)
        .iter()
        .map(|x| {
            let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum();
            if d2 <= radius * radius {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok(Estimate::from_samples(&ind))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::DriftField;
    use crate::sde::engine::{simulate, EnsembleConfig};

    #[test]
    fn brownian_marginals_pass_ks() {
        let cfg = EnsembleConfig::new(vec![0.3, -0.2], 0.5, 0.01, 20_000, 11);
        let ens = simulate(&cfg, &DriftField::zero(2)).unwrap();
        let r = ks_normal_marginals(&ens, 0.5, &[0.3, -0.2], &[1.0, 1.0], 0.01).unwrap();
        assert!(r.iter().all(|k| k.pass), "{r:?}");
        // the wrong variance is detected
        let bad = ks_normal_marginals(&ens, 0.5, &[0.3, -0.2], &[0.5, 0.5], 0.01).unwrap();
        assert!(bad.iter().all(|k| !k.pass));
    }

    #[test]
    fn ornstein_uhlenbeck_law() {
        let cfg = EnsembleConfig::new(vec![2.0], 1.0, 1e-3, 20_000, 12);
        let ens = simulate(&cfg, &DriftField::ornstein_uhlenbeck(1, 1.0)).unwrap();
        let e1 = (-1.0f64).exp();
        let r = ks_normal_marginals(&ens, 1.0, &[2.0 * e1], &[1.0 - e1 * e1], 0.01).unwrap();
        assert!(r[0].pass, "{r:?}");
    }

    #[test]
    fn histogram_has_unit_mass_and_kde_integrates() {
        let cfg = EnsembleConfig::new(vec![0.0, 0.0], 0.2, 0.01, 5000, 13);
        let ens = simulate(&cfg, &DriftField::zero(2)).unwrap();
        let g = GridSpec::new(2, 8.0, 32, 0.0, 1.0, 1).unwrap();
        let d = density_estimate(&ens, 0.2, &g, Some((0.0, 1.0))).unwrap();
        assert_eq!(d.outside_fraction, 0.0);
        assert!((d.dual_norm.unwrap() - 1.0).abs() < 1e-12);
        let xs = marginal_samples(&ens, 0.2, 0).unwrap();
        let pts: Vec<f64> = (0..801).map(|i| -4.0 + i as f64 * 0.01).collect();
        let k = kde(&xs, &pts, silverman_bandwidth(&xs));
        let mass: f64 = k.iter().sum::<f64>() * 0.01;
        assert!((mass - 1.0).abs() < 1e-3);
        assert!(density_estimate(&ens, 0.15, &g, None).is_err());
    }

    #[test]
    fn stronger_centripetal_drift_concentrates_mass() {
        let g = GridSpec::new(3, 4.0, 64, 0.0, 1.0, 1).unwrap();
        let mut prev = -1.0;
        for c in [0.0, 0.5, 1.0, 2.0] {
            let b = DriftField::radial(c, 3).mollify(&g, 0.1).unwrap();
            let cfg = EnsembleConfig::new(vec![0.1, 0.0, 0.0], 0.05, 1e-3, 10_000, 14);
            let ens = simulate(&cfg, &b).unwrap();
            let m = mass_within(&ens, 0.05, &[0.0; 3], 0.1).unwrap();
            assert!(m.mean > prev, "c={c}: {m:?}");
            prev = m.mean;
        }
    }
}
