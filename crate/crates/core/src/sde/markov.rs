//! Restart consistency: `E f(X_{t₁})` from one run against a run restarted at
//! `t₀` from the empirical law of `X_{t₀}` with fresh noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drift::DriftField;
use crate::error::{Error, Result};

use super::engine::{map_paths, EnsembleConfig, Walker};
use super::rng::NormalStream;
use super::stats::Estimate;
use super::weak_conv::{grid_step, Observable};

/// Seed offset of the restart stage.
const RESTART_SEED: u64 = 0x7265_7374_6172_7400;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarkovReport {
    pub t0: f64,
    pub t1: f64,
    pub continuous: Estimate,
    pub restarted: Estimate,
    /// `|Δ| / sqrt(se₁² + se₂²)`.
    pub z: f64,
    pub pass: bool,
}

/// Compare one-stage and restarted estimates of `E f(X_{t₁})`, `t₁ = f.time()`.
pub fn markov_check(drift: &DriftField, cfg: &EnsembleConfig, t0: f64, f: &Observable) -> Result<MarkovReport> {
    f.validate(cfg.dim())?;
    let k0 = grid_step(cfg, t0)?;
    let t1 = f.time();
    let k1 = grid_step(cfg, t1)?;
    if k1 <= k0 {
        return Err(Error::InvalidArgument("the observable time must follow the restart time".into()));
    }
    let rows = map_paths(cfg, drift, |_, mut w| {
        let mut mid = Vec::new();
        while w.step_index() < k1 {
            if w.step_index() == k0 {
                mid = w.state().to_vec();
            }
            w.step()?;
        }
        Ok((mid, f.value(w.state())))
    })?;
    let continuous = Estimate::from_samples(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
    let (_, dt) = cfg.steps();
    let d = cfg.dim();
    let m = rows.len();
    let restart_seed = cfg.seed ^ RESTART_SEED;
    let vals: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(restart_seed);
            rng.set_stream(i as u64);
            let j = rng.random_range(0..m);
            let noise = NormalStream::new(restart_seed, i as u64, d);
            let mut w = Walker::new(drift, t0, &rows[j].0, dt, k1 - k0, cfg.sigma, noise);
            Ok(f.value(w.run_to_end()?))
        })
        .collect::<Result<_>>()?;
    let restarted = Estimate::from_samples(&vals);
    let z = continuous.z_against(&restarted);
    Ok(MarkovReport {
        t0,
        t1,
        continuous,
        restarted,
        z,
        pass: z <= 3.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brownian_restart_agrees() {
        let cfg = EnsembleConfig::new(vec![0.0, 0.0], 1.0, 0.01, 10_000, 31);
        let f = Observable::Gauss { time: 1.0, width: 1.5 };
        let r = markov_check(&DriftField::zero(2), &cfg, 0.5, &f).unwrap();
        assert!(r.pass, "{r:?}");
        // two axes, each contributing (w²/(w² + 2·2))^{1/2}
        let exact = 2.25 / (2.25 + 4.0);
        assert!(r.continuous.within(exact, 3.0, 0.0), "{:?} vs {exact}", r.continuous);
    }

    #[test]
    fn ornstein_uhlenbeck_two_stage_composition() {
        let cfg = EnsembleConfig::new(vec![1.0], 1.0, 1e-3, 10_000, 32);
        let f = Observable::Cos { time: 1.0, axis: 0, freq: 1.0 };
        let r = markov_check(&DriftField::ornstein_uhlenbeck(1, 1.0), &cfg, 0.5, &f).unwrap();
        assert!(r.pass, "{r:?}");
        // X_1 ~ N(e^{-1}, 1 − e^{-2}) so E cos X_1 = cos(m) e^{−v/2}
        let e1 = (-1.0f64).exp();
        let exact = e1.cos() * (-(1.0 - e1 * e1) / 2.0).exp();
        assert!(r.restarted.within(exact, 3.0, 2e-3), "{:?} vs {exact}", r.restarted);
    }

    #[test]
    fn restart_time_off_grid() {
        let cfg = EnsembleConfig::new(vec![0.0], 1.0, 0.1, 200, 1);
        let f = Observable::Tanh { time: 1.0, axis: 0 };
        assert!(matches!(markov_check(&DriftField::zero(1), &cfg, 0.55, &f), Err(Error::NotGridTime(_))));
    }
}
