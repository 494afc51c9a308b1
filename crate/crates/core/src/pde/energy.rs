//! Local energy inequality monitor.
//!
//! For `w = (u − κ)⁺`, a cutoff `η` supported in a translate of `Q₂` and the
//! running indicator `I_t = 1_{(−∞, t]}`, compares
//! `‖η w I_t‖_V` with
//! `Ξ^{1/2}(‖w 1_{η≠0} I_t‖_{r₁;s₁} + ‖w η I_t‖_{r₂;s₂} + ‖f χ₂ I_t‖_{α₃,p₃;q₃} ‖1_{wη≠0} I_t‖_{r₃;s₃})`
//! where `Ξ = 1 + ‖∂_t η‖_∞ + ‖∇η‖²_∞ + ‖∇²η‖_∞` and `(rᵢ, sᵢ)` are the energy
//! exponents of `(αᵢ, pᵢ, qᵢ)`. The ratio is the empirical constant `C_emp(t)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, SpaceTimeField};
use crate::norms::cutoff::{chi_at, step_derivative_bounds, CutoffFamily};
use crate::norms::{energy_exponents, lp_slice, slice_norms, NormSpec};

use super::{PdeProblem, SolutionBundle};

/// The cutoff `η = χ_ρ^{s,z}` (support in `(s − 4ρ², s + 4ρ²) × B_{2ρ}(z)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaCutoff {
    pub radius: f64,
    pub s: f64,
    pub z: Vec<f64>,
}

impl EtaCutoff {
    pub fn new(radius: f64, s: f64, z: Vec<f64>) -> Self {
        Self { radius, s, z }
    }

    /// Entry `(i, j)` of a cutoff family: time center `i`, spatial center `j`.
    pub fn from_family(fam: &CutoffFamily, grid: &GridSpec, i: usize, j: usize) -> Self {
        let mut z = vec![0.0; grid.dim()];
        grid.node_position(fam.space_centers[j], &mut z);
        Self::new(fam.radius, fam.time_centers[i], z)
    }

    pub fn value(&self, grid: &GridSpec, t: f64, x: &[f64]) -> f64 {
        chi_at(grid, self.radius, self.s, &self.z, t, x)
    }

    /// The cutoff at twice the radius, equal to 1 on the support of `η`.
    pub fn doubled(&self) -> Self {
        Self::new(2.0 * self.radius, self.s, self.z.clone())
    }

    /// `Ξ_η` from the derivative bounds of the step profile.
    pub fn xi(&self) -> f64 {
        let (d1, d2) = step_derivative_bounds();
        let r2 = self.radius * self.radius;
        // radial Hessian eigenvalues are φ''/ρ² and φ'/(ρ|x|) with |x| ≥ ρ on the transition shell
        1.0 + d1 / (3.0 * r2) + d1 * d1 / r2 + d1.max(d2) / r2
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyReport {
    pub kappa: f64,
    pub xi: f64,
    /// Energy exponents `(rᵢ, sᵢ)` of the three groups.
    pub exponents: [(f64, f64); 3],
    pub times: Vec<f64>,
    pub lhs: Vec<f64>,
    /// The three right-hand norm groups (without `Ξ^{1/2}`).
    pub groups: Vec<[f64; 3]>,
    pub rhs: Vec<f64>,
    pub c_emp: Vec<f64>,
}

impl EnergyReport {
    pub fn max_c_emp(&self) -> f64 {
        self.c_emp.iter().fold(0.0, |m: f64, &v| m.max(v))
    }

    /// Largest relative change of `C_emp` against a report on a refined grid
    /// sharing the same monitor times.
    pub fn refinement_change(&self, fine: &EnergyReport) -> f64 {
        self.times
            .iter()
            .zip(&self.c_emp)
            .filter_map(|(t, c)| {
                let k = fine.times.iter().position(|s| (s - t).abs() < 1e-9)?;
                let f = fine.c_emp[k];
                let scale = c.abs().max(f.abs());
                Some(if scale == 0.0 { 0.0 } else { (c - f).abs() / scale })
            })
            .fold(0.0, f64::max)
    }
}

/// `L^q` norm over the stored slices `0..=k` (trapezoid on `[t₀, t_k]`).
fn partial_lq(values: &[f64], dt: f64, k: usize, q: f64) -> f64 {
    if q.is_infinite() {
        return values[..=k].iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    }
    if k == 0 {
        return 0.0;
    }
    let mut s = 0.5 * (values[0].abs().powf(q) + values[k].abs().powf(q));
    for v in &values[1..k] {
        s += v.abs().powf(q);
    }
    (s * dt).powf(1.0 / q)
}

/// Evaluate the energy inequality at every stored time after the first.
///
/// `specs` give `(αᵢ, pᵢ, qᵢ)` for the drift, divergence and source groups;
/// the source group norm uses `specs[2]` directly.
pub fn energy_monitor(
    bundle: &SolutionBundle,
    problem: &PdeProblem,
    eta: &EtaCutoff,
    kappa: f64,
    specs: &[NormSpec; 3],
) -> Result<EnergyReport> {
    let g = *bundle.grid();
    if problem.grid() != &g {
        return Err(Error::ShapeMismatch("solution and problem grids differ".into()));
    }
    if eta.z.len() != g.dim() {
        return Err(Error::ShapeMismatch("cutoff center has the wrong dimension".into()));
    }
    let exponents = specs.map(|s| energy_exponents(s.alpha, s.p, s.q));
    let chi2 = eta.doubled();
    let u = &bundle.u;
    let w = u.map(|v| (v - kappa).max(0.0));
    let eta_f = SpaceTimeField::from_fn(g, |t, x| eta.value(&g, t, x));
    let eta_w = w.zip_with(&eta_f, |a, b| a * b)?;
    let w_on = w.zip_with(&eta_f, |a, b| if b != 0.0 { a } else { 0.0 })?;
    let ind = eta_w.map(|v| if v != 0.0 { 1.0 } else { 0.0 });
    let f_chi = {
        let c = SpaceTimeField::from_fn(g, |t, x| chi2.value(&g, t, x));
        problem.source.zip_with(&c, |a, b| a * b)?
    };

    let vol = g.cell_volume();
    let slices = g.num_slices();
    let l2 = |f: &SpaceTimeField| -> Vec<f64> { (0..slices).map(|k| lp_slice(f.slice(k, 0), 2.0, vol)).collect() };
    let eta_w_l2 = l2(&eta_w);
    let grad = eta_w.fd_gradient()?;
    let grad_l2: Vec<f64> = (0..slices)
        .map(|k| {
            let s: f64 = (0..g.dim()).map(|a| grad.slice(k, a).iter().map(|v| v * v).sum::<f64>()).sum();
            (s * vol).sqrt()
        })
        .collect();
    let (r1, s1) = exponents[0];
    let (r2, s2) = exponents[1];
    let (r3, s3) = exponents[2];
    let g1: Vec<f64> = (0..slices).map(|k| lp_slice(w_on.slice(k, 0), r1, vol)).collect();
    let g2: Vec<f64> = (0..slices).map(|k| lp_slice(eta_w.slice(k, 0), r2, vol)).collect();
    let f3 = slice_norms(&f_chi, specs[2].alpha, specs[2].p)?;
    let i3: Vec<f64> = (0..slices).map(|k| lp_slice(ind.slice(k, 0), r3, vol)).collect();

    let dt = g.dt();
    let xi = eta.xi();
    let mut report = EnergyReport {
        kappa,
        xi,
        exponents,
        times: Vec::new(),
        lhs: Vec::new(),
        groups: Vec::new(),
        rhs: Vec::new(),
        c_emp: Vec::new(),
    };
    for k in 1..slices {
        let lhs = partial_lq(&eta_w_l2, dt, k, f64::INFINITY) + partial_lq(&grad_l2, dt, k, 2.0);
        let groups = [
            partial_lq(&g1, dt, k, s1),
            partial_lq(&g2, dt, k, s2),
            partial_lq(&f3, dt, k, specs[2].q) * partial_lq(&i3, dt, k, s3),
        ];
        let rhs = xi.sqrt() * groups.iter().sum::<f64>();
        let c = if lhs == 0.0 {
            0.0
        } else if rhs == 0.0 {
            f64::INFINITY
        } else {
            lhs / rhs
        };
        report.times.push(g.time(k));
        report.lhs.push(lhs);
        report.groups.push(groups);
        report.rhs.push(rhs);
        report.c_emp.push(c);
    }
    Ok(report)
}
