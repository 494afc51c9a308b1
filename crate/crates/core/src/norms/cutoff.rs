//! Smooth parabolic cutoffs `χ_r(t, x) = χ(t/r², x/r)`.
//!
//! The base profile is `χ(t, x) = S((|t| − 1)/3) · S(|x| − 1)` where `S` is a
//! C^∞ step equal to 1 on `(−∞, 0]` and 0 on `[1, ∞)`. It is 1 on
//! `|t| < 1, |x| < 1` and vanishes once `|t| ≥ 4` or `|x| ≥ 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

fn g(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// Smooth step: 1 for `u ≤ 0`, 0 for `u ≥ 1`.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        1.0
    } else if u >= 1.0 {
        0.0
    } else {
        let a = g(1.0 - u);
        a / (a + g(u))
    }
}

/// Derivative of [`smooth_step`].
pub fn smooth_step_deriv(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    let a = g(1.0 - u);
    let b = g(u);
    let v = 1.0 - u;
    -a * b * (1.0 / (v * v) + 1.0 / (u * u)) / ((a + b) * (a + b))
}

/// Second derivative of [`smooth_step`] by centered differences of the exact first derivative.
pub fn smooth_step_deriv2(u: f64) -> f64 {
    let e = 1e-6;
    (smooth_step_deriv(u + e) - smooth_step_deriv(u - e)) / (2.0 * e)
}

/// Bounds `(max|S'|, max|S''|)` sampled on a fine mesh, computed once.
pub fn step_derivative_bounds() -> (f64, f64) {
    static BOUNDS: std::sync::OnceLock<(f64, f64)> = std::sync::OnceLock::new();
    *BOUNDS.get_or_init(|| {
        let m = 20_000;
        let mut d1: f64 = 0.0;
        let mut d2: f64 = 0.0;
        for i in 1..m {
            let u = i as f64 / m as f64;
            d1 = d1.max(smooth_step_deriv(u).abs());
            d2 = d2.max(smooth_step_deriv2(u).abs());
        }
        (d1, d2)
    })
}

/// Temporal factor of the unit-scale cutoff.
pub fn chi_time(t: f64) -> f64 {
    smooth_step((t.abs() - 1.0) / 3.0)
}

/// Spatial factor of the unit-scale cutoff as a function of `|x|`.
pub fn chi_space(r: f64) -> f64 {
    smooth_step(r - 1.0)
}

/// `χ_r^{s,z}(t, x)` on the periodic box (minimal-image displacement).
pub fn chi_at(grid: &GridSpec, r: f64, s: f64, z: &[f64], t: f64, x: &[f64]) -> f64 {
    let dist2: f64 = x.iter().zip(z).map(|(a, b)| grid.wrap(a - b).powi(2)).sum();
    chi_time((t - s) / (r * r)) * chi_space(dist2.sqrt() / r)
}

/// A family of translates `χ_r^{s,z}` whose centers form a lattice of spacing
/// `r/2` in space (snapped to grid nodes) and `r²/2` in time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CutoffFamily {
    pub radius: f64,
    /// Time centers `s`.
    pub time_centers: Vec<f64>,
    /// Flat node indices of spatial centers `z`.
    pub space_centers: Vec<usize>,
}

impl CutoffFamily {
    pub fn new(grid: &GridSpec, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!("cutoff radius must be positive, got {radius}")));
        }
        if grid.extent < 8.0 * radius {
            return Err(Error::InvalidArgument(format!(
                "box length {} is below 8r = {}; cutoff supports would wrap",
                grid.extent,
                8.0 * radius
            )));
        }
        let n = grid.n();
        let stride = ((0.5 * radius / grid.h()).floor() as usize).max(1);
        let axis: Vec<usize> = (0..n).step_by(stride).collect();
        let d = grid.dim();
        let mut space_centers = Vec::with_capacity(axis.len().pow(d as u32));
        let mut idx = vec![0usize; d];
        let total = axis.len().pow(d as u32);
        for mut m in 0..total {
            for a in (0..d).rev() {
                idx[a] = axis[m % axis.len()];
                m /= axis.len();
            }
            space_centers.push(grid.flatten(&idx));
        }
        let dt = 0.5 * radius * radius;
        let span = grid.time_end - grid.time_start;
        let count = (span / dt).floor() as usize + 1;
        let time_centers = (0..count).map(|i| grid.time_start + i as f64 * dt).collect();
        let fam = Self {
            radius,
            time_centers,
            space_centers,
        };
        if fam.is_empty() {
            return Err(Error::EmptyLattice);
        }
        Ok(fam)
    }

    /// Single cutoff centered at `(s, z)`.
    pub fn single(radius: f64, s: f64, z: usize) -> Self {
        Self {
            radius,
            time_centers: vec![s],
            space_centers: vec![z],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.time_centers.is_empty() || self.space_centers.is_empty()
    }

    pub fn len(&self) -> usize {
        self.time_centers.len() * self.space_centers.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn step_limits_and_symmetry() {
        assert_eq!(smooth_step(-0.1), 1.0);
        assert_eq!(smooth_step(1.2), 0.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        for i in 1..100 {
            let u = i as f64 / 100.0;
            assert!((smooth_step(u) + smooth_step(1.0 - u) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        for i in 1..50 {
            let u = i as f64 / 50.0;
            let e = 1e-6;
            let fd = (smooth_step(u + e) - smooth_step(u - e)) / (2.0 * e);
            assert!((fd - smooth_step_deriv(u)).abs() < 1e-6);
        }
        let (d1, d2) = step_derivative_bounds();
        assert!((d1 - 2.0).abs() < 1e-6 && d2 > 0.0);
    }

    #[test]
    fn lattice_spacing_and_wrap_guard() {
        let g = GridSpec::new(2, 8.0, 32, 0.0, 1.0, 4).unwrap();
        let fam = CutoffFamily::new(&g, 1.0).unwrap();
        assert_eq!(fam.space_centers.len(), 16 * 16);
        assert_eq!(fam.time_centers, vec![0.0, 0.5, 1.0]);
        assert!(CutoffFamily::new(&g, 1.5).is_err());
    }

    proptest! {
        #[test]
        fn cutoff_invariants(t in -6.0f64..6.0, x in -3.0f64..3.0, y in -3.0f64..3.0, r in 0.2f64..1.0) {
            let g = GridSpec::new(2, 20.0, 8, 0.0, 1.0, 1).unwrap();
            let v = chi_at(&g, r, 0.0, &[0.0, 0.0], t, &[x, y]);
            prop_assert!((0.0..=1.0).contains(&v));
            let rad = (x * x + y * y).sqrt();
            if t.abs() < r * r && rad < r {
                prop_assert_eq!(v, 1.0);
            }
            if t.abs() >= 4.0 * r * r || rad >= 2.0 * r {
                prop_assert_eq!(v, 0.0);
            }
        }
    }
}
