//! Euler–Maruyama for `dX = b(t, X) dt + σ dW` with `σ = √2` by default.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drift::DriftField;
use crate::error::{Error, Result};

use super::rng::NormalStream;

fn default_sigma() -> f64 {
    std::f64::consts::SQRT_2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub start_time: f64,
    pub start: Vec<f64>,
    pub horizon: f64,
    pub dt: f64,
    pub paths: usize,
    pub seed: u64,
    /// Diffusion coefficient; `√2` matches the generator `Δ + b·∇`.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Store the state every this many steps (0: only start and end).
    #[serde(default)]
    pub record_every: usize,
    /// Keep the Brownian increments (needed for backward flows).
    #[serde(default)]
    pub keep_increments: bool,
}

impl EnsembleConfig {
    pub fn new(start: Vec<f64>, horizon: f64, dt: f64, paths: usize, seed: u64) -> Self {
        Self {
            start_time: 0.0,
            start,
            horizon,
            dt,
            paths,
            seed,
            sigma: default_sigma(),
            record_every: 0,
            keep_increments: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if self.paths < 100 {
            return Err(Error::InvalidArgument(format!("at least 100 paths required, got {}", self.paths)));
        }
        if !(self.horizon > self.start_time) {
            return Err(Error::InvalidArgument("horizon must exceed the start time".into()));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidArgument("sigma must be positive".into()));
        }
        if self.start.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("start point must be finite".into()));
        }
        Ok(())
    }

    /// Number of steps `K` and the effective step `(T − s)/K`.
    pub fn steps(&self) -> (usize, f64) {
        let span = self.horizon - self.start_time;
        let k = ((span / self.dt) - 1e-9).ceil().max(1.0) as usize;
        (k, span / k as f64)
    }

    pub fn dim(&self) -> usize {
        self.start.len()
    }
}

/// One Euler–Maruyama path, stepped by the caller.
pub struct Walker<'a> {
    drift: &'a DriftField,
    noise: NormalStream,
    t0: f64,
    dt: f64,
    sqrt_dt: f64,
    sigma: f64,
    steps: usize,
    k: usize,
    x: Vec<f64>,
    b: Vec<f64>,
    z: Vec<f64>,
}

impl<'a> Walker<'a> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(drift: &'a DriftField, t0: f64, x: &[f64], dt: f64, steps: usize, sigma: f64, noise: NormalStream) -> Self {
        let d = x.len();
        Self {
            drift,
            noise,
            t0,
            dt,
            sqrt_dt: dt.sqrt(),
            sigma,
            steps,
            k: 0,
            x: x.to_vec(),
            b: vec![0.0; d],
            z: vec![0.0; d],
        }
    }

    pub fn time(&self) -> f64 {
        self.t0 + self.k as f64 * self.dt
    }

    pub fn time_at(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn step_index(&self) -> usize {
        self.k
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn state(&self) -> &[f64] {
        &self.x
    }

    pub fn done(&self) -> bool {
        self.k >= self.steps
    }

    /// Standard normals used by the last step (`ΔW = √dt · z`).
    pub fn last_normals(&self) -> &[f64] {
        &self.z
    }

    /// Drift at the current point.
    pub fn drift_here(&mut self) -> &[f64] {
        self.drift.eval(self.time(), &self.x, &mut self.b);
        &self.b
    }

    /// `X ← X + b dt + σ √dt z`.
    pub fn step(&mut self) -> Result<()> {
        let t = self.time();
        self.noise.fill(&mut self.z);
        if self.drift.is_zero() {
            for (x, z) in self.x.iter_mut().zip(&self.z) {
                *x += self.sigma * self.sqrt_dt * z;
            }
        } else {
            self.drift.eval(t, &self.x, &mut self.b);
            for ((x, b), z) in self.x.iter_mut().zip(&self.b).zip(&self.z) {
                *x += b * self.dt + self.sigma * self.sqrt_dt * z;
            }
        }
        self.k += 1;
        if self.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index: self.k,
                context: "Euler–Maruyama state".into(),
            });
        }
        Ok(())
    }

    /// Step to the end, returning the final state.
    pub fn run_to_end(&mut self) -> Result<&[f64]> {
        while !self.done() {
            self.step()?;
        }
        Ok(&self.x)
    }
}

fn check_drift(cfg: &EnsembleConfig, drift: &DriftField) -> Result<()> {
    cfg.validate()?;
    drift.require_regular()?;
    if drift.dim() != cfg.dim() {
        return Err(Error::ShapeMismatch(format!(
            "drift of dimension {} with a {}-dimensional start",
            drift.dim(),
            cfg.dim()
        )));
    }
    Ok(())
}

/// Walker for path `i` of the ensemble.
pub fn walker<'a>(cfg: &EnsembleConfig, drift: &'a DriftField, i: usize) -> Walker<'a> {
    let (steps, dt) = cfg.steps();
    Walker::new(
        drift,
        cfg.start_time,
        &cfg.start,
        dt,
        steps,
        cfg.sigma,
        NormalStream::new(cfg.seed, i as u64, cfg.dim()),
    )
}

/// Map every path through `f` in parallel; output order follows path index.
pub fn map_paths<T, F>(cfg: &EnsembleConfig, drift: &DriftField, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, Walker<'_>) -> Result<T> + Sync,
{
    check_drift(cfg, drift)?;
    (0..cfg.paths).into_par_iter().map(|i| f(i, walker(cfg, drift, i))).collect()
}

/// Stored ensemble: recorded states per path and optionally all increments.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble {
    pub config: EnsembleConfig,
    /// Effective step.
    pub dt: f64,
    /// Step indices at which states were recorded.
    pub record_steps: Vec<usize>,
    /// `[path][record][d]`.
    pub states: Vec<f64>,
    /// `[path][step][d]` standard normals, when kept.
    pub normals: Option<Vec<f64>>,
}

impl TrajectoryEnsemble {
    pub fn dim(&self) -> usize {
        self.config.dim()
    }

    pub fn paths(&self) -> usize {
        self.config.paths
    }

    pub fn steps(&self) -> usize {
        self.config.steps().0
    }

    pub fn times(&self) -> Vec<f64> {
        self.record_steps
            .iter()
            .map(|&k| self.config.start_time + k as f64 * self.dt)
            .collect()
    }

    /// State of path `i` at record `r`.
    pub fn state(&self, i: usize, r: usize) -> &[f64] {
        let d = self.dim();
        let nr = self.record_steps.len();
        &self.states[(i * nr + r) * d..(i * nr + r + 1) * d]
    }

    /// Record index of time `t`, if recorded.
    pub fn record_of(&self, t: f64) -> Option<usize> {
        self.times().iter().position(|s| (s - t).abs() <= 1e-9 * (1.0 + t.abs()))
    }

    /// States of all paths at record `r`.
    pub fn marginal(&self, r: usize) -> Vec<&[f64]> {
        (0..self.paths()).map(|i| self.state(i, r)).collect()
    }

    /// Standard normals of path `i` at step `k`.
    pub fn normals(&self, i: usize, k: usize) -> Option<&[f64]> {
        let d = self.dim();
        let s = self.steps();
        self.normals.as_ref().map(|n| &n[(i * s + k) * d..(i * s + k + 1) * d])
    }
}

/// Simulate and store an ensemble.
pub fn simulate(cfg: &EnsembleConfig, drift: &DriftField) -> Result<TrajectoryEnsemble> {
    let (steps, dt) = cfg.steps();
    let d = cfg.dim();
    let record_steps: Vec<usize> = if cfg.record_every == 0 {
        vec![0, steps]
    } else {
        let mut v: Vec<usize> = (0..=steps).step_by(cfg.record_every).collect();
        if *v.last().unwrap() != steps {
            v.push(steps);
        }
        v
    };
    let per_path = map_paths(cfg, drift, |_, mut w| {
        let mut states = Vec::with_capacity(record_steps.len() * d);
        let mut normals = if cfg.keep_increments { Vec::with_capacity(steps * d) } else { Vec::new() };
        let mut next = 0;
        loop {
            if next < record_steps.len() && record_steps[next] == w.step_index() {
                states.extend_from_slice(w.state());
                next += 1;
            }
            if w.done() {
                break;
            }
            w.step()?;
            if cfg.keep_increments {
                normals.extend_from_slice(w.last_normals());
            }
        }
        Ok((states, normals))
    })?;
    let mut states = Vec::with_capacity(cfg.paths * record_steps.len() * d);
    let mut normals = cfg.keep_increments.then(|| Vec::with_capacity(cfg.paths * steps * d));
    for (s, n) in per_path {
        states.extend(s);
        if let Some(all) = normals.as_mut() {
            all.extend(n);
        }
    }
    Ok(TrajectoryEnsemble {
        config: cfg.clone(),
        dt,
        record_steps,
        states,
        normals,
    })
}

/// Strong self-refinement: `E|X^{dt}_T − X^{dt/2}_T|` for each `dt`, with the
/// coarse path driven by sums of the fine increments.
pub fn strong_refinement(cfg: &EnsembleConfig, drift: &DriftField, dts: &[f64]) -> Result<Vec<(f64, super::stats::Estimate)>> {
    check_drift(cfg, drift)?;
    let d = cfg.dim();
    dts.iter()
        .map(|&dt| {
            let coarse_cfg = EnsembleConfig { dt, ..cfg.clone() };
            let (steps, dtc) = coarse_cfg.steps();
            let dtf = dtc / 2.0;
            let errs: Vec<f64> = (0..cfg.paths)
                .into_par_iter()
                .map(|i| {
                    let mut noise = NormalStream::new(cfg.seed, i as u64, d);
                    let mut xf = cfg.start.clone();
                    let mut xc = cfg.start.clone();
                    let mut b = vec![0.0; d];
                    let (mut z1, mut z2) = (vec![0.0; d], vec![0.0; d]);
                    for k in 0..steps {
                        let t = cfg.start_time + k as f64 * dtc;
                        noise.fill(&mut z1);
                        noise.fill(&mut z2);
                        drift.eval(t, &xc, &mut b);
                        for a in 0..d {
                            xc[a] += b[a] * dtc + cfg.sigma * dtf.sqrt() * (z1[a] + z2[a]);
                        }
                        drift.eval(t, &xf, &mut b);
                        for a in 0..d {
                            xf[a] += b[a] * dtf + cfg.sigma * dtf.sqrt() * z1[a];
                        }
                        drift.eval(t + dtf, &xf, &mut b);
                        for a in 0..d {
                            xf[a] += b[a] * dtf + cfg.sigma * dtf.sqrt() * z2[a];
                        }
                    }
                    xf.iter().zip(&xc).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt()
                })
                .collect();
            Ok((dtc, super::stats::Estimate::from_samples(&errs)))
        })
        .collect()
}
