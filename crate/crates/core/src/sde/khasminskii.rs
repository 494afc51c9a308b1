//! Exponential moments `E exp(λ ∫_s^{s+w} |f(t, X_t)| dt)`.
//!
//! The estimate is reported on `M` and `2M` paths; it is stable when doubling
//! the paths moves it by less than two standard errors of the larger sample.
//! A path whose exponent exceeds [`MAX_EXPONENT`] aborts the estimate.

use serde::{Deserialize, Serialize};

use crate::drift::DriftField;
use crate::error::{Error, Result};
use crate::fft::Spectral;
use crate::grid::SpaceTimeField;

use super::engine::{map_paths, EnsembleConfig};
use super::field_value;
use super::stats::Estimate;

/// Largest exponent accepted before reporting an overflow.
pub const MAX_EXPONENT: f64 = 700.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KhasminskiiReport {
    pub lambda: f64,
    /// Estimate on the first `M` paths.
    pub half: Estimate,
    /// Estimate on all `2M` paths; its mean is `C_emp`.
    pub full: Estimate,
    /// `|full − half|`.
    pub change: f64,
    pub max_exponent: f64,
    pub stable: bool,
}

impl KhasminskiiReport {
    pub fn c_emp(&self) -> f64 {
        self.full.mean
    }
}

/// Estimate the exponential moment with `cfg.paths = 2M` paths over
/// `[cfg.start_time, cfg.horizon]`.
pub fn khasminskii_verify(drift: &DriftField, f: &SpaceTimeField, lambda: f64, cfg: &EnsembleConfig) -> Result<KhasminskiiReport> {
    f.require_scalar()?;
    if cfg.paths < 200 || cfg.paths % 2 != 0 {
        return Err(Error::InvalidArgument("exponential moments need an even path count of at least 200".into()));
    }
    let exps = map_paths(cfg, drift, |_, mut w| {
        let mut acc = 0.0;
        while !w.done() {
            acc += field_value(f, w.time(), w.state()).abs() * w.dt();
            w.step()?;
        }
        Ok(lambda * acc)
    })?;
    let max_exponent = exps.iter().fold(f64::NEG_INFINITY, |m: f64, &v| m.max(v));
    if max_exponent > MAX_EXPONENT {
        let below = exps.iter().filter(|&&e| e <= MAX_EXPONENT).count();
        return Err(Error::ExponentOverflow {
            quantile: below as f64 / exps.len() as f64,
            exponent: max_exponent,
        });
    }
    let vals: Vec<f64> = exps.iter().map(|e| e.exp()).collect();
    let m = vals.len() / 2;
    let half = Estimate::from_samples(&vals[..m]);
    let full = Estimate::from_samples(&vals);
    let change = (full.mean - half.mean).abs();
    Ok(KhasminskiiReport {
        lambda,
        half,
        full,
        change,
        max_exponent,
        // round-off floor for integrands that are constant along paths
        stable: change < 2.0 * full.se + 1e-12 * full.mean,
    })
}

/// `v(0, x) = E exp(λ ∫_0^w f(x + √2 W_t) dt)` on the periodic box by Strang
/// splitting of `∂_t v = Δv + λ f v`: half multiplications by `e^{λ f dt/2}`
/// around the exact heat step `e^{−|k|² dt}`. `f` is time independent (slice 0).
pub fn heat_exponential_moment(f: &SpaceTimeField, lambda: f64, window: f64, steps: usize) -> Result<Vec<f64>> {
    f.require_scalar()?;
    if steps == 0 || !(window > 0.0) {
        return Err(Error::InvalidArgument("splitting needs a positive window and step count".into()));
    }
    let g = *f.grid();
    let spec = Spectral::new(&g);
    let dt = window / steps as f64;
    let half: Vec<f64> = f.slice(0, 0).iter().map(|v| (0.5 * lambda * v.abs() * dt).exp()).collect();
    let mut v = vec![1.0; g.num_nodes()];
    for _ in 0..steps {
        v.iter_mut().zip(&half).for_each(|(a, m)| *a *= m);
        v = spec.radial_multiplier(&v, |k2| (-k2 * dt).exp());
        v.iter_mut().zip(&half).for_each(|(a, m)| *a *= m);
    }
    Ok(v)
}
