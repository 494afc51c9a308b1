//! Integrability check `‖|b‖|_{p₁;q₁} + ‖|(div b)⁻‖|_{p₂;q₂} < ∞`.
//!
//! A grid norm is always finite, so finiteness is decided by refinement
//! stability (relative change below 5% under `N → 2N`) and, for the analytic
//! families, by the radial integral `∫₀ r^{d−1−a p} dr` of the leading singularity.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fft::Spectral;
use crate::grid::{GridSpec, SpaceTimeField};
use crate::norms::localized::localized_norm_default;
use crate::norms::NormSpec;

use super::{DriftField, Provenance};

/// Relative change under refinement below which a norm counts as stable.
pub const STABILITY_TOL: f64 = 0.05;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
    pub cutoff_radius: f64,
    /// Localized norm of `|b|` at `N` and `2N`.
    pub drift_norms: [f64; 2],
    /// Localized norm of `(div b)⁻` at `N` and `2N`.
    pub divergence_norms: [f64; 2],
    pub drift_stable: bool,
    pub divergence_stable: bool,
    /// Local integrability of the leading singularity when known in closed form.
    pub drift_oracle: Option<bool>,
    pub divergence_oracle: Option<bool>,
    /// `d/pᵢ + 2/qᵢ < 2` for both pairs.
    pub exponents_ok: [bool; 2],
    pub admissible: bool,
}

fn relative_change(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// `∫₀¹ r^{d−1−a p} dr < ∞`.
fn radial_integrable(d: usize, a: f64, p: f64) -> bool {
    a * p < d as f64
}

/// Closed-form integrability of `|b|` and `(div b)⁻` near the singular set.
fn oracle(b: &DriftField, p1: f64, p2: f64) -> (Option<bool>, Option<bool>) {
    let d = b.dim();
    if b.mollification_level().is_some() {
        return (None, None);
    }
    match b.provenance() {
        Provenance::Radial { c } => {
            if *c == 0.0 {
                return (Some(true), Some(true));
            }
            let div_neg = c * (d as f64 - 2.0) > 0.0;
            (
                Some(radial_integrable(d, 1.0, p1)),
                Some(!div_neg || radial_integrable(d, 2.0, p2)),
            )
        }
        Provenance::Lattice { alpha, .. } => {
            // |b| ~ r^{1−α}; div ~ γ (d−α) r^{−α} is negative near the point only when α > d
            let b_ok = *alpha <= 1.0 || radial_integrable(d, alpha - 1.0, p1);
            let div_ok = *alpha <= d as f64 || radial_integrable(d, *alpha, p2);
            (Some(b_ok), Some(div_ok))
        }
        Provenance::Zero => (Some(true), Some(true)),
        _ => (None, None),
    }
}

fn norms_on(b: &DriftField, grid: &GridSpec, s1: &NormSpec, s2: &NormSpec) -> Result<(f64, f64)> {
    let samples = b.sample(grid)?;
    let bn = localized_norm_default(&samples.field, s1)?;
    let div = match samples.divergence {
        Some(dv) => dv,
        None => {
            let sp = Spectral::new(grid);
            let mut dv = SpaceTimeField::zeros(*grid, 1);
            for k in 0..grid.num_slices() {
                let comps: Vec<&[f64]> = (0..grid.dim()).map(|c| samples.field.slice(k, c)).collect();
                let v = sp.divergence(&comps);
                dv.slice_mut(k, 0).copy_from_slice(&v);
            }
            dv
        }
    };
    let neg = div.map(|v| (-v).max(0.0));
    let dn = localized_norm_default(&neg, s2)?;
    Ok((bn, dn))
}

/// Check both integrability conditions on `grid` and its refinement.
pub fn check_admissibility(b: &DriftField, p1: f64, q1: f64, p2: f64, q2: f64, grid: &GridSpec) -> Result<AdmissibilityReport> {
    let d = grid.dim() as f64;
    let radius = (grid.extent / 8.0).min(1.0);
    let s1 = NormSpec::lebesgue(p1, q1).with_radius(radius);
    let s2 = NormSpec::lebesgue(p2, q2).with_radius(radius);
    let coarse = norms_on(b, grid, &s1, &s2)?;
    let fine = norms_on(b, &grid.with_points(2 * grid.n())?, &s1, &s2)?;
    let drift_stable = relative_change(coarse.0, fine.0) < STABILITY_TOL;
    let divergence_stable = relative_change(coarse.1, fine.1) < STABILITY_TOL;
    let (drift_oracle, divergence_oracle) = oracle(b, p1, p2);
    let exponents_ok = [d / p1 + 2.0 / q1 < 2.0, d / p2 + 2.0 / q2 < 2.0];
    let admissible = exponents_ok[0]
        && exponents_ok[1]
        && drift_stable
        && divergence_stable
        && drift_oracle.unwrap_or(true)
        && divergence_oracle.unwrap_or(true);
    Ok(AdmissibilityReport {
        p1,
        q1,
        p2,
        q2,
        cutoff_radius: radius,
        drift_norms: [coarse.0, fine.0],
        divergence_norms: [coarse.1, fine.1],
        drift_stable,
        divergence_stable,
        drift_oracle,
        divergence_oracle,
        exponents_ok,
        admissible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_drift_is_admissible() {
        let g = GridSpec::new(3, 4.0, 16, 0.0, 1.0, 1).unwrap();
        let r = check_admissibility(&DriftField::zero(3), 4.0, f64::INFINITY, 4.0, f64::INFINITY, &g).unwrap();
        assert!(r.admissible);
        assert_eq!(r.drift_norms, [0.0, 0.0]);
        assert_eq!(r.divergence_norms, [0.0, 0.0]);
    }

    #[test]
    fn radial_oracle_matches_integrals() {
        let b = DriftField::radial(1.0, 3);
        assert_eq!(oracle(&b, 2.5, 1.4), (Some(true), Some(true)));
        assert_eq!(oracle(&b, 3.0, 1.6), (Some(false), Some(false)));
        let out = DriftField::radial(-1.0, 3);
        assert_eq!(oracle(&out, 2.5, 10.0).1, Some(true));
    }
}
