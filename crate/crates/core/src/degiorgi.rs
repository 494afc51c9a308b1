//! The De Giorgi level-set iteration run on a discrete solution.
//!
//! Around a center `(s, z)` at scale `ρ` the cylinders are
//! `Γ_n = (s − ρ²t_n, s + ρ²t_n) × B_{ρλ_n}(z)` with `t_n = 4(4⁻¹ + 3·4⁻ⁿ)`
//! and `λ_n = 1 + 2^{1−n}`, shrinking to `Q_ρ`. The truncations are
//! `w_n = (u − κ_n)⁺` with `κ_n = κ(1 − 2^{1−n})`, and
//! `a_n = (ℓ_n⁽¹⁾ + ℓ_n⁽²⁾ + ℓ_n⁽³⁾)/κ` with `ℓ_n⁽ⁱ⁾ = ‖w_n 1_{Γ_n}‖_{rᵢ;sᵢ}`.
//! Slices outside the solution's horizon count as zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, SpaceTimeField};
use crate::norms::cutoff::{chi_at, smooth_step, step_derivative_bounds};
use crate::norms::{energy_exponents, lp_slice, lq_time, slice_norms, NormSpec};
use crate::pde::{v_norm, SolutionBundle};

/// Default number of iterations: `κ_n` is then within `2⁻¹¹κ` of `κ`.
pub const DEFAULT_N_MAX: usize = 12;
/// Bisection floor and ceiling relative to `‖u‖_∞`.
pub const KAPPA_FLOOR: f64 = 1e-6;
pub const KAPPA_CEILING: f64 = 1e6;
/// A run certifies `κ` when `a_{n_max} < CERTIFY_RATIO · a₁`.
pub const CERTIFY_RATIO: f64 = 1e-8;

pub fn time_radius(n: usize) -> f64 {
    4.0 * (0.25 + 3.0 * 4f64.powi(-(n as i32)))
}

pub fn space_radius(n: usize) -> f64 {
    1.0 + 2f64.powi(1 - n as i32)
}

pub fn level(kappa: f64, n: usize) -> f64 {
    kappa * (1.0 - 2f64.powi(1 - n as i32))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeGiorgiConfig {
    /// `(αᵢ, pᵢ, qᵢ)` for the three norm groups.
    pub exponents: [NormSpec; 3],
    pub center_time: f64,
    pub center: Vec<f64>,
    /// Scale `ρ`; `Γ₁ = Q_{2ρ}`.
    pub radius: f64,
    pub n_max: usize,
}

impl DeGiorgiConfig {
    pub fn new(exponents: [NormSpec; 3], center_time: f64, center: Vec<f64>) -> Self {
        Self {
            exponents,
            center_time,
            center,
            radius: 1.0,
            n_max: DEFAULT_N_MAX,
        }
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    fn validate(&self, g: &GridSpec) -> Result<()> {
        if self.n_max < 2 {
            return Err(Error::InvalidArgument(format!("n_max must be at least 2, got {}", self.n_max)));
        }
        if !(self.radius > 0.0) {
            return Err(Error::InvalidArgument("cylinder scale must be positive".into()));
        }
        if self.center.len() != g.dim() {
            return Err(Error::ShapeMismatch("cylinder center has the wrong dimension".into()));
        }
        for s in &self.exponents {
            s.validate()?;
        }
        Ok(())
    }

    fn rs(&self) -> [(f64, f64); 3] {
        self.exponents.map(|s| energy_exponents(s.alpha, s.p, s.q))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeGiorgiState {
    pub n: usize,
    pub t_n: f64,
    pub lambda_n: f64,
    pub kappa_n: f64,
    pub ell: [f64; 3],
    pub a_n: f64,
}

/// Envelope `a_{n+1} ≤ C₀ λⁿ a_n^{1+ε}` fitted to the observed pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecursionFit {
    pub c0: f64,
    pub lambda: f64,
    pub epsilon: f64,
    /// Pairs with both terms positive used by the fit.
    pub pairs: usize,
}

impl RecursionFit {
    /// Lemma threshold for indexing from `n = 1`: `(C₀λ)^{−1/ε} λ^{−1/ε²}`.
    pub fn threshold(&self) -> f64 {
        lemma_threshold(self.c0, self.lambda, self.epsilon)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationReport {
    pub kappa: f64,
    pub states: Vec<DeGiorgiState>,
    pub fit: Option<RecursionFit>,
    /// `‖u⁺ χ_{2ρ}‖_V`.
    pub v_norm_chi2: f64,
    /// `C₁ = Σℓ₁⁽ⁱ⁾ / ‖u⁺χ₂‖_V`.
    pub c1: f64,
    /// Whether `a_n` is non-increasing and `a_{n_max} < 10⁻⁸ a₁` (or `a₁ = 0`).
    pub certified: bool,
}

impl IterationReport {
    pub fn a(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.a_n).collect()
    }

    pub fn is_decreasing(&self) -> bool {
        self.states.windows(2).all(|p| p[1].a_n <= p[0].a_n)
    }
}

/// Indicator of `Γ_n` (scale `ρ`) on one slice, or `None` when the slice misses it.
fn cylinder_mask(g: &GridSpec, cfg: &DeGiorgiConfig, n: usize, t: f64) -> Option<Vec<bool>> {
    let r2 = cfg.radius * cfg.radius;
    if (t - cfg.center_time).abs() >= r2 * time_radius(n) {
        return None;
    }
    let rad = cfg.radius * space_radius(n);
    let mut x = vec![0.0; g.dim()];
    Some(
        (0..g.num_nodes())
            .map(|j| {
                g.node_position(j, &mut x);
                let d2: f64 = x.iter().zip(&cfg.center).map(|(a, b)| g.wrap(a - b).powi(2)).sum();
                d2 < rad * rad
            })
            .collect(),
    )
}

fn ell(u: &SpaceTimeField, cfg: &DeGiorgiConfig, n: usize, kappa_n: f64) -> [f64; 3] {
    let g = *u.grid();
    let vol = g.cell_volume();
    let rs = cfg.rs();
    let mut per_slice = vec![vec![0.0; g.num_slices()]; 3];
    let mut buf = vec![0.0; g.num_nodes()];
    for k in 0..g.num_slices() {
        let Some(mask) = cylinder_mask(&g, cfg, n, g.time(k)) else {
            continue;
        };
        for ((b, &v), &m) in buf.iter_mut().zip(u.slice(k, 0)).zip(&mask) {
            *b = if m { (v - kappa_n).max(0.0) } else { 0.0 };
        }
        for i in 0..3 {
            per_slice[i][k] = lp_slice(&buf, rs[i].0, vol);
        }
    }
    let w = g.time_weights();
    [0, 1, 2].map(|i| lq_time(&per_slice[i], &w, rs[i].1))
}

/// Solve the 3×3 system `m x = b` by Gaussian elimination with partial pivoting.
fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for c in 0..3 {
        let p = (c..3).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c].abs() < 1e-12 {
            return None;
        }
        m.swap(c, p);
        b.swap(c, p);
        for r in c + 1..3 {
            let f = m[r][c] / m[c][c];
            for k in c..3 {
                m[r][k] -= f * m[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = [0.0; 3];
    for c in (0..3).rev() {
        let s: f64 = (c + 1..3).map(|k| m[c][k] * x[k]).sum();
        x[c] = (b[c] - s) / m[c][c];
    }
    Some(x)
}

/// Least-squares fit of `log a_{n+1} = log C₀ + n log λ + (1+ε) log a_n`, shifted up
/// so it bounds every observed pair, with `C₀, λ` raised to just above 1 when needed
/// (raising either keeps the envelope valid since `n ≥ 1`).
pub fn fit_recursion(a: &[f64]) -> Option<RecursionFit> {
    let pts: Vec<(f64, f64, f64)> = a
        .windows(2)
        .enumerate()
        .filter(|(_, p)| p[0] > 0.0 && p[1] > 0.0)
        .map(|(i, p)| ((i + 1) as f64, p[0].ln(), p[1].ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let full = if pts.len() >= 3 {
        let mut m = [[0.0; 3]; 3];
        let mut b = [0.0; 3];
        for &(n, x, y) in &pts {
            let row = [1.0, n, x];
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += row[i] * row[j];
                }
                b[i] += row[i] * y;
            }
        }
        solve3(m, b)
    } else {
        None
    };
    // fall back to λ = 1 when n and log a_n are collinear
    let [c, l, slope] = full.unwrap_or_else(|| {
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.2).sum::<f64>() / k;
        let sxx: f64 = pts.iter().map(|p| (p.1 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.1 - mx) * (p.2 - my)).sum();
        let slope = if sxx > 0.0 { sxy / sxx } else { 1.0 };
        [my - slope * mx, 0.0, slope]
    });
    let epsilon = slope - 1.0;
    let log_lambda = l.max(1e-9);
    let shift = pts
        .iter()
        .map(|&(n, x, y)| y - (c + n * log_lambda + slope * x))
        .fold(0.0, f64::max);
    let log_c0 = (c + shift).max(1e-9);
    Some(RecursionFit {
        c0: log_c0.exp(),
        lambda: log_lambda.exp(),
        epsilon,
        pairs: pts.len(),
    })
}

/// Run the iteration at level `κ`.
pub fn run_iteration(u: &SolutionBundle, cfg: &DeGiorgiConfig, kappa: f64) -> Result<IterationReport> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidArgument(format!("kappa must be positive, got {kappa}")));
    }
    let g = *u.grid();
    cfg.validate(&g)?;
    let field = &u.u;
    let states: Vec<DeGiorgiState> = (1..=cfg.n_max)
        .map(|n| {
            let kappa_n = level(kappa, n);
            let l = ell(field, cfg, n, kappa_n);
            DeGiorgiState {
                n,
                t_n: time_radius(n),
                lambda_n: space_radius(n),
                kappa_n,
                ell: l,
                a_n: l.iter().sum::<f64>() / kappa,
            }
        })
        .collect();
    let a: Vec<f64> = states.iter().map(|s| s.a_n).collect();
    let v = u_plus_chi2_v_norm(field, cfg)?;
    let first: f64 = states[0].ell.iter().sum();
    let decreasing = a.windows(2).all(|p| p[1] <= p[0]);
    let certified = a[0] == 0.0 || (decreasing && a[a.len() - 1] < CERTIFY_RATIO * a[0]);
    Ok(IterationReport {
        kappa,
        fit: fit_recursion(&a),
        states,
        v_norm_chi2: v,
        c1: if v > 0.0 { first / v } else { 0.0 },
        certified,
    })
}

/// `‖u⁺ χ_{2ρ}^{s,z}‖_V` with forward-difference gradients.
pub fn u_plus_chi2_v_norm(u: &SpaceTimeField, cfg: &DeGiorgiConfig) -> Result<f64> {
    let g = *u.grid();
    let r = 2.0 * cfg.radius;
    let chi = SpaceTimeField::from_fn(g, |t, x| chi_at(&g, r, cfg.center_time, &cfg.center, t, x));
    v_norm(&u.zip_with(&chi, |a, c| a.max(0.0) * c)?)
}

/// `‖f χ_{2ρ}^{s,z}‖_{α,p;q}` for the source group.
pub fn source_norm(f: &SpaceTimeField, cfg: &DeGiorgiConfig) -> Result<f64> {
    let g = *f.grid();
    let r = 2.0 * cfg.radius;
    let chi = SpaceTimeField::from_fn(g, |t, x| chi_at(&g, r, cfg.center_time, &cfg.center, t, x));
    let spec = &cfg.exponents[2];
    let a = slice_norms(&f.zip_with(&chi, |a, c| a * c)?, spec.alpha, spec.p)?;
    Ok(lq_time(&a, &g.time_weights(), spec.q))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KappaCertificate {
    /// Smallest certifying level found (within 5% relative).
    pub kappa: f64,
    pub report: IterationReport,
    /// `C₁ (C₀λ)^{1/ε} λ^{1/ε²} ‖u⁺χ₂‖_V ∨ ‖fχ₂‖` from the fit at `kappa`;
    /// absent when no fit with `ε > 0` is available.
    pub sufficient_bound: Option<f64>,
    pub source_norm: f64,
    pub bisection_steps: usize,
}

/// Geometric bisection for the smallest `κ` that certifies decay.
pub fn threshold_kappa(u: &SolutionBundle, cfg: &DeGiorgiConfig, f_norm: f64) -> Result<KappaCertificate> {
    let sup = u.u.max_abs();
    let scale = if sup > 0.0 { sup } else { 1.0 };
    let mut lo = KAPPA_FLOOR * scale;
    let mut hi = KAPPA_CEILING * scale;
    let mut hi_report = run_iteration(u, cfg, hi)?;
    if !hi_report.certified {
        return Err(Error::KappaNotCertified { ceiling: hi });
    }
    let lo_report = run_iteration(u, cfg, lo)?;
    let mut steps = 0;
    let best = if lo_report.certified {
        hi = lo;
        lo_report
    } else {
        while hi / lo > 1.05 {
            let mid = (lo * hi).sqrt();
            let r = run_iteration(u, cfg, mid)?;
            if r.certified {
                hi = mid;
                hi_report = r;
            } else {
                lo = mid;
            }
            steps += 1;
        }
        hi_report
    };
    let sufficient_bound = best.fit.filter(|f| f.epsilon > 0.0).map(|f| {
        let e = f.epsilon;
        let first: f64 = best.states[0].ell.iter().sum();
        // C₁‖u⁺χ₂‖_V equals Σℓ₁ by definition of the empirical C₁
        let log_b = first.ln() + (f.c0 * f.lambda).ln() / e + f.lambda.ln() / (e * e);
        log_b.exp().max(f_norm)
    });
    Ok(KappaCertificate {
        kappa: hi,
        report: best,
        sufficient_bound,
        source_norm: f_norm,
        bisection_steps: steps,
    })
}

/// `sup u` over the nodes of `Q_ρ(s, z)` inside the horizon.
pub fn sup_on_unit_cylinder(u: &SpaceTimeField, cfg: &DeGiorgiConfig) -> f64 {
    let g = *u.grid();
    let r = cfg.radius;
    let mut x = vec![0.0; g.dim()];
    let mut m = f64::NEG_INFINITY;
    for k in 0..g.num_slices() {
        if (g.time(k) - cfg.center_time).abs() > r * r {
            continue;
        }
        for (j, &v) in u.slice(k, 0).iter().enumerate() {
            g.node_position(j, &mut x);
            let d2: f64 = x.iter().zip(&cfg.center).map(|(a, b)| g.wrap(a - b).powi(2)).sum();
            if d2 <= r * r {
                m = m.max(v);
            }
        }
    }
    m
}

/// Lemma threshold `(C₀λ)^{−1/ε} λ^{−1/ε²}` for a recursion indexed from `n = 1`.
pub fn lemma_threshold(c0: f64, lambda: f64, eps: f64) -> f64 {
    log_lemma_threshold(c0, lambda, eps).exp()
}

pub fn log_lemma_threshold(c0: f64, lambda: f64, eps: f64) -> f64 {
    -(c0 * lambda).ln() / eps - lambda.ln() / (eps * eps)
}

/// `C₀^{−1/ε} λ^{−1/ε²}`, the threshold of the classical statement indexed from `n = 0`.
pub fn stated_threshold(c0: f64, lambda: f64, eps: f64) -> f64 {
    log_stated_threshold(c0, lambda, eps).exp()
}

pub fn log_stated_threshold(c0: f64, lambda: f64, eps: f64) -> f64 {
    -c0.ln() / eps - lambda.ln() / (eps * eps)
}

/// `log a_n` for `n = 1..=steps` under `a_{n+1} = C₀ λⁿ a_n^{1+ε}`, computed in logs.
pub fn lemma_recursion_log(c0: f64, lambda: f64, eps: f64, log_a1: f64, steps: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(steps);
    let mut la = log_a1;
    for n in 1..=steps {
        out.push(la);
        la = c0.ln() + n as f64 * lambda.ln() + (1.0 + eps) * la;
    }
    out
}

/// Whether the equality recursion from `log a₁` obeys `a_n ≤ λ^{−(n−1)/ε} a₁` for `steps` terms.
pub fn lemma_holds(c0: f64, lambda: f64, eps: f64, log_a1: f64, steps: usize) -> bool {
    let la = lemma_recursion_log(c0, lambda, eps, log_a1, steps);
    la.iter().enumerate().all(|(i, &l)| {
        let bound = log_a1 - i as f64 * lambda.ln() / eps;
        l <= bound + 1e-9 * (1.0 + bound.abs())
    })
}

/// One rung `η_n = ζ_n(t) ζ_n(x)` of the cutoff ladder at scale `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderRung {
    pub n: usize,
    /// `Ξ_{η_n}` from the profile derivative bounds.
    pub xi: f64,
    /// `Ξ_{η_n} / 4ⁿ`.
    pub xi_over_4n: f64,
    /// `η_n = 1` at every grid point of `Γ_{n+1}` and `0` at every grid point outside `Γ_n`.
    pub nested: bool,
}

/// `η_n(t, x)` at scale `ρ` around `(s, z)`.
pub fn ladder_value(g: &GridSpec, cfg: &DeGiorgiConfig, n: usize, t: f64, x: &[f64]) -> f64 {
    let r = cfg.radius;
    let at = (t - cfg.center_time).abs() / (r * r);
    let tt = smooth_step((at - time_radius(n + 1)) / (time_radius(n) - time_radius(n + 1)));
    let d2: f64 = x.iter().zip(&cfg.center).map(|(a, b)| g.wrap(a - b).powi(2)).sum();
    let ax = d2.sqrt() / r;
    let xx = smooth_step((ax - space_radius(n + 1)) / (space_radius(n) - space_radius(n + 1)));
    tt * xx
}

/// The ladder `η_1 … η_{n_max}` checked on the grid of `g`.
pub fn cutoff_ladder(g: &GridSpec, cfg: &DeGiorgiConfig) -> Result<Vec<LadderRung>> {
    cfg.validate(g)?;
    let (d1, d2) = step_derivative_bounds();
    let r2 = cfg.radius * cfg.radius;
    let mut x = vec![0.0; g.dim()];
    Ok((1..=cfg.n_max)
        .map(|n| {
            let dt = time_radius(n) - time_radius(n + 1);
            let dx = space_radius(n) - space_radius(n + 1);
            // radial Hessian eigenvalues: ζ'' / dx² and ζ' / (dx |x|) with |x| ≥ λ_{n+1}
            let hess = (d2 / (dx * dx)).max(d1 / (dx * space_radius(n + 1)));
            let xi = 1.0 + d1 / (dt * r2) + (d1 / dx).powi(2) / r2 + hess / r2;
            let mut nested = true;
            for k in 0..g.num_slices() {
                let t = g.time(k);
                let inner = cylinder_mask(g, cfg, n + 1, t);
                let outer = cylinder_mask(g, cfg, n, t);
                for j in 0..g.num_nodes() {
                    g.node_position(j, &mut x);
                    let v = ladder_value(g, cfg, n, t, &x);
                    if inner.as_ref().is_some_and(|m| m[j]) && v != 1.0 {
                        nested = false;
                    }
                    if !outer.as_ref().is_some_and(|m| m[j]) && v != 0.0 {
                        nested = false;
                    }
                }
            }
            LadderRung {
                n,
                xi,
                xi_over_4n: xi / 4f64.powi(n as i32),
                nested,
            }
        })
        .collect())
}
