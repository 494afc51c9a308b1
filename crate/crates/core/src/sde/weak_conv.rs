//! Observables and path moduli across a ladder of mollification levels.
//!
//! For each level the scan estimates bounded observables `f(X_{T_i})` and the
//! modulus `E sup_{t ≤ T−δ} |X_{t+δ} − X_t|^{1/2}`. Consecutive levels are
//! compared through `|Δ| / se`; the modulus is divided by the shape
//! `δ^{θ/2} + δ^{1/4}` and its constant compared across levels.

use serde::{Deserialize, Serialize};

use crate::drift::DriftField;
use crate::error::{Error, Result};

use super::engine::{map_paths, EnsembleConfig};
use super::stats::Estimate;

/// A bounded function of the state at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Observable {
    /// `cos(freq · x_axis)`.
    Cos { time: f64, axis: usize, freq: f64 },
    /// `exp(−|x|²/width²)`.
    Gauss { time: f64, width: f64 },
    /// `tanh(x_axis)`.
    Tanh { time: f64, axis: usize },
}

impl Observable {
    pub fn time(&self) -> f64 {
        match self {
            Self::Cos { time, .. } | Self::Gauss { time, .. } | Self::Tanh { time, .. } => *time,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Self::Cos { axis, freq, .. } => (freq * x[*axis]).cos(),
            Self::Gauss { width, .. } => (-x.iter().map(|v| v * v).sum::<f64>() / (width * width)).exp(),
            Self::Tanh { axis, .. } => x[*axis].tanh(),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let ok = match self {
            Self::Cos { axis, freq, .. } => *axis < dim && freq.is_finite(),
            Self::Gauss { width, .. } => *width > 0.0 && width.is_finite(),
            Self::Tanh { axis, .. } => *axis < dim,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("observable {self:?} is not a bounded function on R^{dim}")))
        }
    }
}

pub(crate) fn grid_step(cfg: &EnsembleConfig, t: f64) -> Result<usize> {
    let (k, dt) = cfg.steps();
    let s = (t - cfg.start_time) / dt;
    let r = s.round();
    if (s - r).abs() > 1e-6 || r < 0.0 || r as usize > k {
        return Err(Error::NotGridTime(t));
    }
    Ok(r as usize)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub ensemble: EnsembleConfig,
    pub observables: Vec<Observable>,
    /// Lags of the path modulus, each a multiple of `dt`.
    pub modulus_deltas: Vec<f64>,
    /// Exponent in the modulus shape `δ^{θ/2} + δ^{1/4}`.
    pub theta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanLevel {
    pub epsilon: f64,
    pub observables: Vec<Estimate>,
    pub modulus: Vec<Estimate>,
    /// `max_δ modulus(δ) / (δ^{θ/2} + δ^{1/4})`.
    pub shape_constant: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanReport {
    pub levels: Vec<ScanLevel>,
    /// `max_obs |Δ|` between consecutive levels.
    pub consecutive_gaps: Vec<f64>,
    /// `max_obs |Δ| / se` between consecutive levels.
    pub consecutive_z: Vec<f64>,
    /// Each gap is either within three standard errors or below the previous one.
    pub cauchy: bool,
    /// `max / min` of the shape constants.
    pub modulus_spread: f64,
}

fn level(drift: &DriftField, eps: f64, cfg: &ScanConfig, obs_steps: &[usize], lags: &[usize]) -> Result<ScanLevel> {
    let d = cfg.ensemble.dim();
    let rows = map_paths(&cfg.ensemble, drift, |_, mut w| {
        let mut path = Vec::with_capacity((w.steps() + 1) * d);
        path.extend_from_slice(w.state());
        while !w.done() {
            w.step()?;
            path.extend_from_slice(w.state());
        }
        let at = |k: usize| &path[k * d..(k + 1) * d];
        let obs: Vec<f64> = cfg.observables.iter().zip(obs_steps).map(|(o, &k)| o.value(at(k))).collect();
        let steps = w.steps();
        let modulus: Vec<f64> = lags
            .iter()
            .map(|&l| {
                (0..=steps.saturating_sub(l))
                    .map(|k| {
                        let inc: f64 = at(k + l).iter().zip(at(k)).map(|(a, b)| (a - b).powi(2)).sum();
                        inc.sqrt().sqrt()
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        Ok((obs, modulus))
    })?;
    let col = |f: &dyn Fn(&(Vec<f64>, Vec<f64>)) -> f64| -> Estimate { Estimate::from_samples(&rows.iter().map(f).collect::<Vec<_>>()) };
    let observables: Vec<Estimate> = (0..cfg.observables.len()).map(|j| col(&|r| r.0[j])).collect();
    let modulus: Vec<Estimate> = (0..lags.len()).map(|j| col(&|r| r.1[j])).collect();
    let shape_constant = modulus
        .iter()
        .zip(&cfg.modulus_deltas)
        .map(|(m, &dl)| m.mean / (dl.powf(cfg.theta / 2.0) + dl.powf(0.25)))
        .fold(0.0, f64::max);
    Ok(ScanLevel {
        epsilon: eps,
        observables,
        modulus,
        shape_constant,
    })
}

/// Scan `(ε, b_ε)` pairs, largest `ε` first.
pub fn weak_convergence_scan(drifts: &[(f64, DriftField)], cfg: &ScanConfig) -> Result<ScanReport> {
    if drifts.is_empty() || cfg.observables.is_empty() {
        return Err(Error::InvalidArgument("need at least one level and one observable".into()));
    }
    for o in &cfg.observables {
        o.validate(cfg.ensemble.dim())?;
    }
    let obs_steps: Vec<usize> = cfg.observables.iter().map(|o| grid_step(&cfg.ensemble, o.time())).collect::<Result<_>>()?;
    let (_, dt) = cfg.ensemble.steps();
    let lags: Vec<usize> = cfg
        .modulus_deltas
        .iter()
        .map(|&dl| {
            let l = (dl / dt).round();
            if l < 1.0 || (l * dt - dl).abs() > 1e-6 * dl {
                Err(Error::InvalidArgument(format!("lag {dl} is not a multiple of dt = {dt}")))
            } else {
                Ok(l as usize)
            }
        })
        .collect::<Result<_>>()?;
    let levels: Vec<ScanLevel> = drifts.iter().map(|(e, b)| level(b, *e, cfg, &obs_steps, &lags)).collect::<Result<_>>()?;
    let mut consecutive_gaps = Vec::new();
    let mut consecutive_z = Vec::new();
    for p in levels.windows(2) {
        let (gap, z) = p[0]
            .observables
            .iter()
            .zip(&p[1].observables)
            .map(|(a, b)| ((a.mean - b.mean).abs(), a.z_against(b)))
            .fold((0.0f64, 0.0f64), |(g, z), (a, b)| (g.max(a), z.max(b)));
        consecutive_gaps.push(gap);
        consecutive_z.push(z);
    }
    let cauchy = consecutive_z
        .iter()
        .enumerate()
        .all(|(i, &z)| z <= 3.0 || (i > 0 && consecutive_gaps[i] < consecutive_gaps[i - 1]));
    let cs: Vec<f64> = levels.iter().map(|l| l.shape_constant).collect();
    let max = cs.iter().copied().fold(0.0, f64::max);
    let min = cs.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ScanReport {
        levels,
        consecutive_gaps,
        consecutive_z,
        cauchy,
        modulus_spread: if min > 0.0 { max / min } else { f64::INFINITY },
    })
}
