//! Bessel-potential and mixed space-time norms.
//!
//! `‖f‖_{α,p;q} = ( ∫ ‖(I−Δ)^{α/2} f(t,·)‖_p^q dt )^{1/q}` with the time
//! integral taken by the trapezoid rule over the stored slices. `p = ∞` and
//! `q = ∞` are maxima over nodes and slices.

pub mod battery;
pub mod cutoff;
pub mod localized;
pub mod mollify;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Spectral;
use crate::grid::SpaceTimeField;

pub use cutoff::CutoffFamily;
pub use localized::localized_norm;
pub use mollify::{mollify, Mollifier};

/// Exponent triple `(α, p, q)` and cutoff radius used by the localized norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSpec {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    #[serde(default = "default_radius")]
    pub cutoff_radius: f64,
}

fn default_radius() -> f64 {
    1.0
}

impl NormSpec {
    pub fn new(alpha: f64, p: f64, q: f64) -> Self {
        Self {
            alpha,
            p,
            q,
            cutoff_radius: 1.0,
        }
    }

    pub fn lebesgue(p: f64, q: f64) -> Self {
        Self::new(0.0, p, q)
    }

    pub fn with_radius(mut self, r: f64) -> Self {
        self.cutoff_radius = r;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0) {
            return Err(Error::InvalidArgument(format!("p must exceed 1, got {}", self.p)));
        }
        if !(self.q > 1.0) {
            return Err(Error::InvalidArgument(format!("q must exceed 1, got {}", self.q)));
        }
        if !(-2.0..=2.0).contains(&self.alpha) {
            return Err(Error::InvalidArgument(format!("alpha must lie in [-2, 2], got {}", self.alpha)));
        }
        if !(self.cutoff_radius > 0.0 && self.cutoff_radius.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "cutoff radius must be positive, got {}",
                self.cutoff_radius
            )));
        }
        Ok(())
    }

    /// `(α, p, q)` lies in the supercritical admissible class for dimension `d ≥ 2`:
    /// `α ∈ [0, 1]` and `d/p + 2/q < 2 − α`.
    pub fn is_admissible(&self, d: usize) -> bool {
        d >= 2
            && (0.0..=1.0).contains(&self.alpha) && d as f64 / self.p + 2.0 / self.q < 2.0 - self.alpha
    }

    /// Conjugate exponents `(r, s)` with
    /// `1/((2−α)p) + 1/r = 1/((2−α)q) + 1/s = 1/2`.
    pub fn energy_exponents(&self) -> (f64, f64) {
        energy_exponents(self.alpha, self.p, self.q)
    }
}

/// See [`NormSpec::energy_exponents`].
pub fn energy_exponents(alpha: f64, p: f64, q: f64) -> (f64, f64) {
    let inv = |x: f64| 0.5 - 1.0 / ((2.0 - alpha) * x);
    (1.0 / inv(p), 1.0 / inv(q))
}

/// Pair `(r, s)` controlled by the energy space: `d/r + 2/s > d/2`.
pub fn energy_controlled(d: usize, r: f64, s: f64) -> bool {
    d as f64 / r + 2.0 / s > d as f64 / 2.0
}

/// Interpolation exponent `θ = d/2 − d/r` for the Gagliardo–Nirenberg step.
pub fn gn_theta(d: usize, r: f64) -> f64 {
    d as f64 / 2.0 - d as f64 / r
}

/// Apply `(I−Δ)^{α/2}` to every slice of a scalar field.
pub fn bessel_apply(f: &SpaceTimeField, alpha: f64) -> Result<SpaceTimeField> {
    f.require_scalar()?;
    f.check_finite("bessel_apply input")?;
    let g = *f.grid();
    if alpha == 0.0 {
        return Ok(f.clone());
    }
    let sp = Spectral::new(&g);
    let mut out = SpaceTimeField::zeros(g, 1);
    for k in 0..g.num_slices() {
        let v = bessel_slice(&sp, f.slice(k, 0), alpha);
        out.slice_mut(k, 0).copy_from_slice(&v);
    }
    Ok(out)
}

pub(crate) fn bessel_slice(sp: &Spectral, slice: &[f64], alpha: f64) -> Vec<f64> {
    if alpha == 0.0 {
        return slice.to_vec();
    }
    sp.radial_multiplier(slice, |k2| (1.0 + k2).powf(0.5 * alpha))
}

/// Discrete `L^p` norm of one slice with cell volume `vol`.
pub fn lp_slice(slice: &[f64], p: f64, vol: f64) -> f64 {
    if p.is_infinite() {
        return slice.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    let s: f64 = slice.iter().map(|v| v.abs().powf(p)).sum();
    (s * vol).powf(1.0 / p)
}

/// Combine per-slice values `a_k` (already spatial norms) into an `L^q` time norm.
pub fn lq_time(values: &[f64], weights: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    let s: f64 = values.iter().zip(weights).map(|(v, w)| w * v.abs().powf(q)).sum();
    s.powf(1.0 / q)
}

/// Per-slice spatial norms `‖(I−Δ)^{α/2} f(t_k)‖_p`. Vector fields use the
/// pointwise magnitude and require `α = 0`.
pub fn slice_norms(f: &SpaceTimeField, alpha: f64, p: f64) -> Result<Vec<f64>> {
    f.check_finite("norm input")?;
    let g = *f.grid();
    let scalar;
    let f = if f.components() > 1 {
        if alpha != 0.0 {
            return Err(Error::InvalidArgument("Bessel norms of vector fields need alpha = 0".into()));
        }
        scalar = f.magnitude();
        &scalar
    } else {
        f
    };
    let sp = (alpha != 0.0).then(|| Spectral::new(&g));
    let vol = g.cell_volume();
    Ok((0..g.num_slices())
        .map(|k| match &sp {
            Some(sp) => lp_slice(&bessel_slice(sp, f.slice(k, 0), alpha), p, vol),
            None => lp_slice(f.slice(k, 0), p, vol),
        })
        .collect())
}

/// Mixed norm `‖f‖_{α,p;q}` over the whole grid.
pub fn spacetime_norm(f: &SpaceTimeField, spec: &NormSpec) -> Result<f64> {
    spec.validate()?;
    let a = slice_norms(f, spec.alpha, spec.p)?;
    Ok(lq_time(&a, &f.grid().time_weights(), spec.q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn constants_are_fixed_by_bessel() {
        let g = GridSpec::new(2, 3.0, 16, 0.0, 1.0, 2).unwrap();
        let f = SpaceTimeField::from_fn(g, |_, _| 2.5);
        for alpha in [-2.0, -0.5, 1.0, 2.0] {
            let out = bessel_apply(&f, alpha).unwrap();
            assert!(out.values().iter().all(|v| (v - 2.5).abs() < 1e-12));
        }
    }

    #[test]
    fn single_mode_gets_analytic_multiplier() {
        let l = 5.0;
        let g = GridSpec::new(2, l, 32, 0.0, 1.0, 1).unwrap();
        let f = SpaceTimeField::from_fn(g, |_, x| (2.0 * PI * x[0] / l).sin());
        let out = bessel_apply(&f, 2.0).unwrap();
        let m = 1.0 + (2.0 * PI / l).powi(2);
        for (a, b) in out.values().iter().zip(f.values()) {
            assert!((a - m * b).abs() < 1e-11);
        }
    }

    /// `(I−Δ)^{1/2}` of a Gaussian evaluated by direct quadrature of its
    /// Fourier integral, independent of the FFT path.
    fn gaussian_bessel_oracle(x: f64) -> f64 {
        let kmax = 40.0;
        let m = 4096 * 4;
        let dk = 2.0 * kmax / m as f64;
        let mut s = 0.0;
        for i in 0..=m {
            let k = -kmax + i as f64 * dk;
            let w = if i == 0 || i == m { 0.5 } else { 1.0 };
            s += w * (1.0 + k * k).sqrt() * (-0.5 * k * k).exp() * (k * x).cos();
        }
        s * dk / (2.0 * PI).sqrt()
    }

    #[test]
    fn gaussian_bessel_matches_quadrature() {
        let l = 20.0;
        let g = GridSpec::new(1, l, 256, 0.0, 1.0, 1).unwrap();
        let f = SpaceTimeField::from_fn(g, |_, x| (-0.5 * x[0] * x[0]).exp());
        let out = bessel_apply(&f, 1.0).unwrap();
        // the operator's kernel decays like e^{-|x|}, so neighbouring periodic images matter near x = ±L/2
        let periodized = |x: f64| (-2..=2).map(|m| gaussian_bessel_oracle(x + m as f64 * l)).sum::<f64>();
        let peak = periodized(0.0);
        for j in (0..256).step_by(7) {
            let x = g.coord(j);
            let want = periodized(x);
            assert!(
                (out.slice(0, 0)[j] - want).abs() <= 1e-6 * peak,
                "x={x}: {} vs {want}",
                out.slice(0, 0)[j]
            );
        }
    }

    #[test]
    fn constant_field_norm_is_volume_factor() {
        for d in 1..=3 {
            let l = 3.0;
            let g = GridSpec::new(d, l, 8, 0.0, 1.0, 5).unwrap();
            let f = SpaceTimeField::from_fn(g, |_, _| 1.0);
            let n = spacetime_norm(&f, &NormSpec::lebesgue(2.0, 2.0)).unwrap();
            assert!((n - l.powf(d as f64 / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn separable_product_norm() {
        let l = 2.0;
        let g = GridSpec::new(2, l, 16, 0.0, 1.0, 2000).unwrap();
        let f = SpaceTimeField::from_fn(g, |t, x| t * (2.0 * PI * x[0] / l).sin());
        let n = spacetime_norm(&f, &NormSpec::lebesgue(2.0, 2.0)).unwrap();
        let want = l.powf(1.0) / 6f64.sqrt();
        assert!((n - want).abs() < 1e-6 * want, "{n} vs {want}");
    }

    #[test]
    fn rejects_p_at_most_one() {
        let g = GridSpec::new(1, 4.0, 8, 0.0, 1.0, 1).unwrap();
        let f = SpaceTimeField::from_fn(g, |_, x| (-x[0] * x[0]).exp());
        assert!(spacetime_norm(&f, &NormSpec::lebesgue(1.0, 2.0)).is_err());
        assert!(spacetime_norm(&f, &NormSpec::lebesgue(2.0, 1.0)).is_err());
    }

    #[test]
    fn energy_exponents_are_controlled_on_admissible_grid() {
        for d in 2..=4 {
            for ia in 0..=4 {
                let alpha = ia as f64 / 4.0;
                for ip in 1..40 {
                    let p = 1.0 + ip as f64 * 0.25;
                    for iq in 1..40 {
                        let q = 1.0 + iq as f64 * 0.25;
                        let spec = NormSpec::new(alpha, p, q);
                        if spec.is_admissible(d) {
                            let (r, s) = spec.energy_exponents();
                            assert!(r > 2.0 && s > 2.0);
                            assert!(energy_controlled(d, r, s), "d={d} {spec:?} -> ({r},{s})");
                        }
                    }
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn bessel_inverse_composition(seed in 0u64..1000, alpha in -2.0f64..2.0) {
            let g = GridSpec::new(2, 4.0, 16, 0.0, 1.0, 1).unwrap();
            let f = SpaceTimeField::from_fn(g, |_, x| {
                ((seed as f64 + 1.0) * 0.37 * x[0]).sin() + (x[1] * x[0]).cos() * 0.3
            });
            let back = bessel_apply(&bessel_apply(&f, alpha).unwrap(), -alpha).unwrap();
            for (a, b) in back.values().iter().zip(f.values()) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }

        #[test]
        fn norm_is_absolutely_homogeneous(c in -5.0f64..5.0, alpha in -1.0f64..1.0, p in 1.1f64..6.0, q in 1.1f64..6.0) {
            let g = GridSpec::new(1, 4.0, 32, 0.0, 1.0, 4).unwrap();
            let f = SpaceTimeField::from_fn(g, |t, x| (1.0 + t) * (-x[0] * x[0]).exp());
            let spec = NormSpec::new(alpha, p, q);
            let a = spacetime_norm(&f.scaled(c), &spec).unwrap();
            let b = c.abs() * spacetime_norm(&f, &spec).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b));
        }
    }
}
