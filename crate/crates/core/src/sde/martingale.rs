//! Martingale problem checks for `L = (σ²/2)Δ + b·∇`.
//!
//! For a test function `f` and a bounded functional `G` of the path up to
//! `t₀`, the defect `E[(M^f_{t₁} − M^f_{t₀}) G]` with
//! `M^f_t = f(X_t) − ∫ Lf(r, X_r) dr` vanishes for the diffusion. On the
//! Euler chain it equals `E[B G]` where `B` sums the one-step defects
//! `E[f(X_{k+1}) | X_k] − f(X_k) − Lf(X_k) dt`, which the test functions here
//! have in closed form. The plain estimator is checked against
//! `3·se + ‖G‖_∞ E|B|`; the conditional estimator `E[B]` is nearly free of
//! noise and gives the weak order.

use serde::{Deserialize, Serialize};

use crate::drift::DriftField;
use crate::error::{Error, Result};

use super::engine::{map_paths, EnsembleConfig};
use super::stats::{line_fit, Estimate};
use super::weak_conv::grid_step;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunction {
    /// `a·x + c`.
    Linear { a: Vec<f64>, c: f64 },
    /// `amp · exp(−|x − center|²/width²)`.
    Gaussian { center: Vec<f64>, width: f64, amp: f64 },
    /// `|x − center|²`.
    Quadratic { center: Vec<f64> },
}

impl TestFunction {
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Self::Linear { a, c } => a.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() + c,
            Self::Gaussian { center, width, amp } => amp * (-dist2(x, center) / (width * width)).exp(),
            Self::Quadratic { center } => dist2(x, center),
        }
    }

    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Self::Linear { a, .. } => out.copy_from_slice(a),
            Self::Gaussian { center, width, .. } => {
                let v = self.value(x);
                let w2 = width * width;
                for ((o, xi), ci) in out.iter_mut().zip(x).zip(center) {
                    *o = -2.0 * (xi - ci) / w2 * v;
                }
            }
            Self::Quadratic { center } => {
                for ((o, xi), ci) in out.iter_mut().zip(x).zip(center) {
                    *o = 2.0 * (xi - ci);
                }
            }
        }
    }

    pub fn laplacian(&self, x: &[f64]) -> f64 {
        let d = x.len() as f64;
        match self {
            Self::Linear { .. } => 0.0,
            Self::Gaussian { center, width, .. } => {
                let w2 = width * width;
                self.value(x) * (4.0 * dist2(x, center) / (w2 * w2) - 2.0 * d / w2)
            }
            Self::Quadratic { .. } => 2.0 * d,
        }
    }

    /// `E f(m + √var Z)` for a standard normal `Z`.
    pub fn gaussian_mean(&self, m: &[f64], var: f64) -> f64 {
        let d = m.len() as f64;
        match self {
            Self::Linear { .. } => self.value(m),
            Self::Gaussian { center, width, amp } => {
                let s = width * width + 2.0 * var;
                amp * (width * width / s).powf(d / 2.0) * (-dist2(m, center) / s).exp()
            }
            Self::Quadratic { center } => dist2(m, center) + d * var,
        }
    }

    fn dim(&self) -> Option<usize> {
        match self {
            Self::Linear { a, .. } => Some(a.len()),
            Self::Gaussian { center, .. } | Self::Quadratic { center } => Some(center.len()),
        }
    }
}

fn dist2(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Bounded functional `G` of the path, evaluated at one time `≤ t₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Probe {
    One,
    /// `cos(freq · X^axis_time)`.
    Cos { time: f64, axis: usize, freq: f64 },
    /// `tanh(X^axis_time)`.
    Tanh { time: f64, axis: usize },
}

impl Probe {
    fn time(&self) -> Option<f64> {
        match self {
            Self::One => None,
            Self::Cos { time, .. } | Self::Tanh { time, .. } => Some(*time),
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        match self {
            Self::One => 1.0,
            Self::Cos { axis, freq, .. } => (freq * x[*axis]).cos(),
            Self::Tanh { axis, .. } => x[*axis].tanh(),
        }
    }

    /// `‖G‖_∞`.
    pub fn sup(&self) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MartingaleReport {
    pub t0: f64,
    pub t1: f64,
    /// `E[(M_{t₁} − M_{t₀}) G]`.
    pub defect: Estimate,
    /// `E[B G]`, the same quantity through one-step conditional means.
    pub conditional: Estimate,
    /// `‖G‖_∞ E|B|`.
    pub allowance: f64,
    pub pass: bool,
}

/// Defect of the martingale problem on `[t0, t1]` tested against `probe`.
pub fn martingale_defect(drift: &DriftField, cfg: &EnsembleConfig, f: &TestFunction, t0: f64, t1: f64, probe: &Probe) -> Result<MartingaleReport> {
    if f.dim().is_some_and(|d| d != cfg.dim()) {
        return Err(Error::ShapeMismatch("test function and start point dimensions differ".into()));
    }
    let k0 = grid_step(cfg, t0)?;
    let k1 = grid_step(cfg, t1)?;
    if k1 <= k0 {
        return Err(Error::InvalidArgument("need t0 < t1".into()));
    }
    let kp = match probe.time() {
        Some(t) => {
            let k = grid_step(cfg, t)?;
            if k > k0 {
                return Err(Error::InvalidArgument("the probe must look at times up to t0".into()));
            }
            k
        }
        None => 0,
    };
    let d = cfg.dim();
    let sigma2 = cfg.sigma * cfg.sigma;
    let rows = map_paths(cfg, drift, |_, mut w| {
        let dt = w.dt();
        let mut grad = vec![0.0; d];
        let mut m = vec![0.0; d];
        let (mut g, mut f0, mut comp, mut b_sum) = (1.0, 0.0, 0.0, 0.0);
        loop {
            let k = w.step_index();
            if k == kp {
                g = probe.value(w.state());
            }
            if k == k0 {
                f0 = f.value(w.state());
            }
            if k == k1 {
                let inc = f.value(w.state()) - f0 - comp;
                return Ok([inc * g, b_sum * g, b_sum.abs()]);
            }
            if k >= k0 {
                let x = w.state().to_vec();
                let fx = f.value(&x);
                f.gradient(&x, &mut grad);
                let b = w.drift_here();
                let adv: f64 = b.iter().zip(&grad).map(|(b, g)| b * g).sum();
                let lf = 0.5 * sigma2 * f.laplacian(&x) + adv;
                for ((mi, xi), bi) in m.iter_mut().zip(&x).zip(b) {
                    *mi = xi + bi * dt;
                }
                comp += lf * dt;
                b_sum += f.gaussian_mean(&m, sigma2 * dt) - fx - lf * dt;
            }
            w.step()?;
        }
    })?;
    let col = |j: usize| -> Vec<f64> { rows.iter().map(|r| r[j]).collect() };
    let defect = Estimate::from_samples(&col(0));
    let conditional = Estimate::from_samples(&col(1));
    let abs_b = col(2).iter().sum::<f64>() / rows.len() as f64;
    let allowance = probe.sup() * abs_b;
    Ok(MartingaleReport {
        t0,
        t1,
        pass: defect.within(0.0, 3.0, allowance),
        defect,
        conditional,
        allowance,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeakOrderReport {
    pub dts: Vec<f64>,
    /// Conditional defect with `G ≡ 1` per step size.
    pub defects: Vec<Estimate>,
    pub slope: f64,
    pub slope_ci: (f64, f64),
    /// `|slope − 1| ≤ 0.3`.
    pub pass: bool,
}

/// Fit `log |E B| ≈ c + p log dt` over `dts` (all dividing `t0`, `t1`).
pub fn weak_order(drift: &DriftField, cfg: &EnsembleConfig, f: &TestFunction, t0: f64, t1: f64, dts: &[f64]) -> Result<WeakOrderReport> {
    if dts.len() < 2 {
        return Err(Error::InvalidArgument("a weak-order fit needs at least two step sizes".into()));
    }
    let mut defects = Vec::with_capacity(dts.len());
    for &dt in dts {
        let mut c = cfg.clone();
        c.dt = dt;
        defects.push(martingale_defect(drift, &c, f, t0, t1, &Probe::One)?.conditional);
    }
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = defects.iter().map(|e| e.mean.abs().max(f64::MIN_POSITIVE).ln()).collect();
    let fit = line_fit(&xs, &ys, None);
    let slope_ci = if dts.len() > 2 { fit.slope_ci(dts.len(), 0.95) } else { (fit.slope, fit.slope) };
    Ok(WeakOrderReport {
        dts: dts.to_vec(),
        defects,
        slope: fit.slope,
        slope_ci,
        pass: (fit.slope - 1.0).abs() <= 0.3,
    })
}
