//! `L¹` growth of the transition semigroup through the flow determinant.
//!
//! `∫ 𝒯_{s,t} f = E ∫ f(y) det ∇Y(y) dy` where `Y` is the backward flow, so
//! for a Gaussian bump `f` the ratio `‖𝒯f‖₁/‖f‖₁` is `E det ∇Y(y)` with `y`
//! drawn from `f/‖f‖₁`. The backward flow runs reverse-time Euler on the
//! forward increments of each path and accumulates
//! `det ∇Y = exp(−∫_s^t div b(r, Y_r) dr)`.
//!
//! For periodic drifts an independent forward estimate starts paths uniformly
//! in the box and averages `L^d f(X_t)`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drift::DriftField;
use crate::error::{Error, Result};

use super::engine::{EnsembleConfig, Walker};
use super::rng::NormalStream;
use super::stats::Estimate;

/// Stream offset separating start draws from Brownian increments.
const START_STREAM: u64 = 0x5eed_0000_0000_0000;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JacobianConfig {
    pub start_time: f64,
    pub end_time: f64,
    pub dt: f64,
    pub paths: usize,
    pub seed: u64,
    /// Center of the bump `f(x) = exp(−|x − c|²/w²)`.
    pub center: Vec<f64>,
    pub width: f64,
    /// Side of the periodic box for the forward uniform-start estimate.
    #[serde(default)]
    pub box_extent: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JacobianReport {
    /// `E det ∇Y(y)`, `y ∼ f/‖f‖₁`.
    pub determinant: Estimate,
    pub det_min: f64,
    pub det_max: f64,
    /// Largest `|div b|` met along backward paths.
    pub max_abs_divergence: f64,
    /// Forward uniform-start estimate of `‖𝒯f‖₁/‖f‖₁`.
    pub forward_ratio: Option<Estimate>,
    /// Empirical constant in `‖𝒯f‖₁ ≤ C ‖f‖₁`.
    pub c_emp: f64,
    pub divergence_free: bool,
    pub pass: bool,
}

impl JacobianConfig {
    fn ensemble(&self, start: Vec<f64>) -> EnsembleConfig {
        let mut e = EnsembleConfig::new(start, self.end_time, self.dt, self.paths, self.seed);
        e.start_time = self.start_time;
        e
    }

    fn bump(&self, x: &[f64]) -> f64 {
        let r2: f64 = match self.box_extent {
            Some(l) => x
                .iter()
                .zip(&self.center)
                .map(|(a, c)| {
                    let d = a - c;
                    let d = d - l * (d / l).round();
                    d * d
                })
                .sum(),
            None => x.iter().zip(&self.center).map(|(a, c)| (a - c).powi(2)).sum(),
        };
        (-r2 / (self.width * self.width)).exp()
    }
}

/// Run the determinant and (when a box is given) forward estimates.
pub fn jacobian_semigroup(drift: &DriftField, cfg: &JacobianConfig) -> Result<JacobianReport> {
    if !drift.has_divergence() {
        return Err(Error::MissingDivergence);
    }
    if !(cfg.width > 0.0) {
        return Err(Error::InvalidArgument("bump width must be positive".into()));
    }
    let d = cfg.center.len();
    let ens = cfg.ensemble(cfg.center.clone());
    ens.validate()?;
    drift.require_regular()?;
    if drift.dim() != d {
        return Err(Error::ShapeMismatch("bump center and drift dimensions differ".into()));
    }
    let (steps, dt) = ens.steps();
    let sd = cfg.width / 2f64.sqrt();
    let per_path: Vec<(f64, f64)> = (0..cfg.paths)
        .into_par_iter()
        .map(|i| {
            let mut y = vec![0.0; d];
            NormalStream::new(cfg.seed, START_STREAM + i as u64, d).fill(&mut y);
            y.iter_mut().zip(&cfg.center).for_each(|(v, c)| *v = c + sd * *v);
            let mut noise = NormalStream::new(cfg.seed, i as u64, d);
            let mut z = vec![0.0; d];
            let mut b = vec![0.0; d];
            let mut log_det = 0.0;
            let mut max_div: f64 = 0.0;
            let sq = ens.sigma * dt.sqrt();
            for k in (0..steps).rev() {
                let r = cfg.start_time + (k + 1) as f64 * dt;
                let div = drift.divergence(r, &y).ok_or(Error::MissingDivergence)?;
                max_div = max_div.max(div.abs());
                log_det -= div * dt;
                drift.eval(r, &y, &mut b);
                noise.seek(k as u64);
                noise.fill(&mut z);
                for ((v, bb), zz) in y.iter_mut().zip(&b).zip(&z) {
                    *v -= bb * dt + sq * zz;
                }
                if y.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite {
                        index: k,
                        context: "backward flow".into(),
                    });
                }
            }
            Ok((log_det.exp(), max_div))
        })
        .collect::<Result<_>>()?;
    let dets: Vec<f64> = per_path.iter().map(|p| p.0).collect();
    let max_abs_divergence = per_path.iter().map(|p| p.1).fold(0.0, f64::max);
    let determinant = Estimate::from_samples(&dets);
    let det_min = dets.iter().copied().fold(f64::INFINITY, f64::min);
    let det_max = dets.iter().copied().fold(0.0, f64::max);

    let forward_ratio = match cfg.box_extent {
        Some(l) => {
            let norm = (PI * cfg.width * cfg.width).powf(d as f64 / 2.0);
            let scale = l.powi(d as i32) / norm;
            let vals: Vec<f64> = (0..cfg.paths)
                .into_par_iter()
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ START_STREAM);
                    rng.set_stream(i as u64);
                    let x0: Vec<f64> = (0..d).map(|_| l * (rng.random::<f64>() - 0.5)).collect();
                    let noise = NormalStream::new(cfg.seed, i as u64, d);
                    let mut w = Walker::new(drift, cfg.start_time, &x0, dt, steps, ens.sigma, noise);
                    Ok(scale * cfg.bump(w.run_to_end()?))
                })
                .collect::<Result<_>>()?;
            Some(Estimate::from_samples(&vals))
        }
        None => None,
    };
    let divergence_free = max_abs_divergence <= 1e-8;
    let c_emp = forward_ratio.as_ref().map_or(determinant.mean, |f| f.mean.max(determinant.mean));
    let pass = c_emp.is_finite()
        && (!divergence_free
            || ((det_min - 1.0).abs() <= 1e-6
                && (det_max - 1.0).abs() <= 1e-6
                && forward_ratio.as_ref().is_none_or(|f| f.within(1.0, 3.0, 0.0))));
    Ok(JacobianReport {
        determinant,
        det_min,
        det_max,
        max_abs_divergence,
        forward_ratio,
        c_emp,
        divergence_free,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(d: usize) -> JacobianConfig {
        JacobianConfig {
            start_time: 0.0,
            end_time: 0.5,
            dt: 0.01,
            paths: 400,
            seed: 2,
            center: vec![0.3; d],
            width: 0.5,
            box_extent: None,
        }
    }

    #[test]
    fn ornstein_uhlenbeck_determinant_is_exponential() {
        let r = jacobian_semigroup(&DriftField::ornstein_uhlenbeck(2, 1.0), &cfg(2)).unwrap();
        let exact = (2.0 * 0.5f64).exp();
        assert!((r.determinant.mean - exact).abs() < 1e-12 * exact);
        assert!(r.determinant.se < 1e-12);
        assert!(!r.divergence_free);
    }

    #[test]
    fn taylor_green_preserves_mass() {
        let mut c = cfg(2);
        c.box_extent = Some(2.0 * PI);
        c.paths = 20_000;
        let r = jacobian_semigroup(&DriftField::taylor_green(), &c).unwrap();
        assert!(r.divergence_free);
        assert_eq!(r.det_min, 1.0);
        let f = r.forward_ratio.unwrap();
        assert!(f.within(1.0, 3.0, 0.0), "{f:?}");
        assert!(r.pass);
    }

    #[test]
    fn missing_divergence_rejected() {
        let b = DriftField::custom(1, "no_div", |_, x, o| o[0] = -x[0], None);
        assert!(matches!(jacobian_semigroup(&b, &cfg(1)), Err(Error::MissingDivergence)));
    }
}
