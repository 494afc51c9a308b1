//! Drift fields: analytic singular families, ingested grid fields, and their
//! mollifications.
//!
//! Singular fields are never evaluated at their singular points on a grid: a
//! node sitting on a singularity takes the value of the field mollified at
//! level `ε = h`. For the odd singular profiles used here that value is 0 for
//! the field itself; the divergence gets the corresponding radial moment.

pub mod admissibility;
pub mod external;
pub mod lattice;
pub mod radial;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Spectral;
use crate::grid::{interp_space, GridSpec, SpaceTimeField};
use crate::norms::mollify::{bump, Mollifier};

pub use admissibility::{check_admissibility, AdmissibilityReport};
pub use external::{energy_class, load_external, EnergyClass};
pub use lattice::LatticeDrift;

/// Where a drift came from; recorded in reports and manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Zero,
    Radial { c: f64 },
    Lattice { gamma_max: f64, alpha: f64, seed: u64, period: usize },
    External { path: String },
    Custom { name: String },
}

type VecFn = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;
type ScalarFn = dyn Fn(f64, &[f64]) -> f64 + Send + Sync;

/// Smooth drift given by closures (treated as regular).
#[derive(Clone)]
pub struct AnalyticDrift {
    eval: Arc<VecFn>,
    div: Option<Arc<ScalarFn>>,
    autonomous: bool,
}

/// Drift stored on grid slices and evaluated by periodic multilinear
/// interpolation in space and linear interpolation in time.
#[derive(Debug, Clone)]
pub struct SampledDrift {
    pub grid: GridSpec,
    pub times: Vec<f64>,
    /// Per slice: `d` component arrays concatenated.
    pub values: Vec<Vec<f64>>,
    pub divergence: Option<Vec<Vec<f64>>>,
}

impl SampledDrift {
    fn locate(&self, t: f64) -> (usize, f64) {
        let n = self.times.len();
        if n == 1 || t <= self.times[0] {
            return (0, 0.0);
        }
        if t >= self.times[n - 1] {
            return (n - 1, 0.0);
        }
        let k = self.times.partition_point(|&s| s <= t) - 1;
        let w = (t - self.times[k]) / (self.times[k + 1] - self.times[k]);
        (k, w)
    }

    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) {
        let nn = self.grid.num_nodes();
        let (k, w) = self.locate(t);
        for (c, o) in out.iter_mut().enumerate() {
            let a = interp_space(&self.grid, &self.values[k][c * nn..(c + 1) * nn], x);
            *o = if w > 0.0 {
                (1.0 - w) * a + w * interp_space(&self.grid, &self.values[k + 1][c * nn..(c + 1) * nn], x)
            } else {
                a
            };
        }
    }

    fn div(&self, t: f64, x: &[f64]) -> Option<f64> {
        let dv = self.divergence.as_ref()?;
        let (k, w) = self.locate(t);
        let a = interp_space(&self.grid, &dv[k], x);
        Some(if w > 0.0 {
            (1.0 - w) * a + w * interp_space(&self.grid, &dv[k + 1], x)
        } else {
            a
        })
    }

    /// Whether this sample lives on the spatial grid `g` (same box and resolution).
    fn same_space(&self, g: &GridSpec) -> bool {
        self.grid.spatial_dim == g.spatial_dim
            && self.grid.points_per_axis == g.points_per_axis
            && self.grid.extent == g.extent
    }
}

#[derive(Clone)]
enum Repr {
    Zero,
    Radial { c: f64 },
    Lattice(Arc<LatticeDrift>),
    Analytic(AnalyticDrift),
    Sampled(Arc<SampledDrift>),
}

/// An evaluable vector field with optional divergence and mollification level.
#[derive(Clone)]
pub struct DriftField {
    dim: usize,
    provenance: Provenance,
    mollification_level: Option<f64>,
    repr: Repr,
}

impl std::fmt::Debug for DriftField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DriftField")
            .field("dim", &self.dim)
            .field("provenance", &self.provenance)
            .field("mollification_level", &self.mollification_level)
            .finish()
    }
}

/// Grid samples of a drift and (when known) its divergence.
#[derive(Debug, Clone)]
pub struct DriftSamples {
    pub field: SpaceTimeField,
    pub divergence: Option<SpaceTimeField>,
}

impl DriftField {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            provenance: Provenance::Zero,
            mollification_level: None,
            repr: Repr::Zero,
        }
    }

    /// Smooth drift from closures.
    pub fn custom(
        dim: usize,
        name: &str,
        eval: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
        divergence: Option<Box<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>>,
    ) -> Self {
        Self {
            dim,
            provenance: Provenance::Custom { name: name.to_string() },
            mollification_level: None,
            repr: Repr::Analytic(AnalyticDrift {
                eval: Arc::new(eval),
                div: divergence.map(Arc::from),
                autonomous: false,
            }),
        }
    }

    /// Declare a closure-defined drift independent of time, so it is sampled once.
    pub fn autonomous(mut self) -> Self {
        if let Repr::Analytic(a) = &mut self.repr {
            a.autonomous = true;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero)
    }

    /// Whether one time slice describes the field completely.
    pub fn is_time_independent(&self) -> bool {
        match &self.repr {
            Repr::Analytic(a) => a.autonomous,
            Repr::Sampled(s) => s.times.len() == 1,
            _ => true,
        }
    }

    /// `b(x) = −a x` with divergence `−a d`.
    pub fn ornstein_uhlenbeck(dim: usize, a: f64) -> Self {
        Self::custom(
            dim,
            "ornstein_uhlenbeck",
            move |_, x, out| {
                for (o, xi) in out.iter_mut().zip(x) {
                    *o = -a * xi;
                }
            },
            Some(Box::new(move |_, _| -a * dim as f64)),
        )
        .autonomous()
    }

    /// Constant drift `b ≡ v`.
    pub fn constant(v: Vec<f64>) -> Self {
        let dim = v.len();
        Self::custom(dim, "constant", move |_, _, out| out.copy_from_slice(&v), Some(Box::new(|_, _| 0.0))).autonomous()
    }

    /// Planar Taylor–Green cell `(sin x₁ cos x₂, −cos x₁ sin x₂)`, divergence free.
    pub fn taylor_green() -> Self {
        Self::custom(
            2,
            "taylor_green",
            |_, x, out| {
                out[0] = x[0].sin() * x[1].cos();
                out[1] = -x[0].cos() * x[1].sin();
            },
            Some(Box::new(|_, _| 0.0)),
        )
        .autonomous()
    }

    pub(crate) fn from_sampled(sampled: SampledDrift, provenance: Provenance, level: Option<f64>) -> Self {
        Self {
            dim: sampled.grid.dim(),
            provenance,
            mollification_level: level,
            repr: Repr::Sampled(Arc::new(sampled)),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn mollification_level(&self) -> Option<f64> {
        self.mollification_level
    }

    /// Finite everywhere: mollified, smooth analytic, zero, or an ingested grid field.
    pub fn is_regular(&self) -> bool {
        match self.repr {
            Repr::Radial { c } => c == 0.0,
            Repr::Lattice(ref l) => l.is_trivial(),
            _ => true,
        }
    }

    /// Singular points of the field inside the periodic cell containing the origin.
    pub fn singular_points(&self) -> Vec<Vec<f64>> {
        match &self.repr {
            Repr::Radial { c } if *c != 0.0 => vec![vec![0.0; self.dim]],
            Repr::Lattice(l) => l.singular_points(),
            _ => Vec::new(),
        }
    }

    /// Squared distance from `x` to the nearest singular point (periodic images included).
    fn singular_distance2(&self, grid: &GridSpec, x: &[f64]) -> Option<f64> {
        match &self.repr {
            Repr::Radial { c } if *c != 0.0 => Some(x.iter().map(|a| grid.wrap(*a).powi(2)).sum()),
            // singularities sit on every integer point
            Repr::Lattice(l) if !l.is_trivial() => Some(x.iter().map(|a| (a - a.round()).powi(2)).sum()),
            _ => None,
        }
    }

    /// Evaluate `b(t, x)`. Exact singular points return 0.
    pub fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) {
        match &self.repr {
            Repr::Zero => out.iter_mut().for_each(|o| *o = 0.0),
            Repr::Radial { c } => radial::eval(*c, x, out),
            Repr::Lattice(l) => l.eval(x, out),
            Repr::Analytic(a) => (a.eval)(t, x, out),
            Repr::Sampled(s) => s.eval(t, x, out),
        }
    }

    /// Divergence where known (analytic or stored).
    pub fn divergence(&self, t: f64, x: &[f64]) -> Option<f64> {
        match &self.repr {
            Repr::Zero => Some(0.0),
            Repr::Radial { c } => Some(radial::divergence(*c, x)),
            Repr::Lattice(l) => Some(l.divergence(x)),
            Repr::Analytic(a) => a.div.as_ref().map(|f| f(t, x)),
            Repr::Sampled(s) => s.div(t, x),
        }
    }

    pub fn has_divergence(&self) -> bool {
        match &self.repr {
            Repr::Analytic(a) => a.div.is_some(),
            Repr::Sampled(s) => s.divergence.is_some(),
            _ => true,
        }
    }

    /// Value at a node lying on a singular point: the field mollified at level `h`.
    fn singular_node_divergence(&self, h: f64, x: &[f64]) -> Option<f64> {
        match &self.repr {
            Repr::Radial { c } => Some(radial::singular_node_divergence(*c, self.dim, h)),
            Repr::Lattice(l) => Some(l.singular_node_divergence(h, x)),
            _ => None,
        }
    }

    /// Sample field and divergence on every slice of `grid`, applying the singular-node rule.
    pub fn sample(&self, grid: &GridSpec) -> Result<DriftSamples> {
        if grid.dim() != self.dim {
            return Err(Error::ShapeMismatch(format!(
                "drift of dimension {} sampled on a {}-dimensional grid",
                self.dim,
                grid.dim()
            )));
        }
        if let Repr::Sampled(s) = &self.repr {
            if s.same_space(grid) && s.times.len() == 1 {
                return Ok(self.sample_stored(s, grid));
            }
        }
        let d = self.dim;
        let h = grid.h();
        let near_singular = |x: &[f64]| self.singular_distance2(grid, x).is_some_and(|r2| r2 < 0.25 * h * h);
        let has_div = self.has_divergence();
        let mut field = SpaceTimeField::zeros(*grid, d);
        let mut div = has_div.then(|| SpaceTimeField::zeros(*grid, 1));
        let nn = grid.num_nodes();
        let mut x = vec![0.0; d];
        let mut v = vec![0.0; d];
        for k in 0..grid.num_slices() {
            let t = grid.time(k);
            let vals = field.values_mut();
            for j in 0..nn {
                grid.node_position(j, &mut x);
                let singular = near_singular(&x);
                if singular {
                    // odd profile: the mollified value at the singular point vanishes
                    v.iter_mut().for_each(|o| *o = 0.0);
                } else {
                    self.eval(t, &x, &mut v);
                }
                for c in 0..d {
                    vals[(k * d + c) * nn + j] = v[c];
                }
                if let Some(dv) = div.as_mut() {
                    let val = if singular {
                        self.singular_node_divergence(h, &x).unwrap_or(0.0)
                    } else {
                        self.divergence(t, &x).unwrap_or(0.0)
                    };
                    dv.slice_mut(k, 0)[j] = val;
                }
            }
        }
        field.check_finite("drift samples")?;
        if let Some(dv) = &div {
            dv.check_finite("drift divergence samples")?;
        }
        Ok(DriftSamples { field, divergence: div })
    }

    fn sample_stored(&self, s: &SampledDrift, grid: &GridSpec) -> DriftSamples {
        let d = self.dim;
        let nn = grid.num_nodes();
        let mut field = SpaceTimeField::zeros(*grid, d);
        let mut div = s.divergence.as_ref().map(|_| SpaceTimeField::zeros(*grid, 1));
        for k in 0..grid.num_slices() {
            for c in 0..d {
                field.slice_mut(k, c).copy_from_slice(&s.values[0][c * nn..(c + 1) * nn]);
            }
            if let (Some(dv), Some(src)) = (div.as_mut(), s.divergence.as_ref()) {
                dv.slice_mut(k, 0).copy_from_slice(&src[0]);
            }
        }
        DriftSamples { field, divergence: div }
    }

    /// Mollify at level `epsilon` on the spatial grid `drift_grid`.
    ///
    /// Time-independent families are sampled once. The divergence of the result
    /// is the mollified sampled divergence when the divergence is known, which
    /// keeps `(div b_ε)⁻ ≤ (div b)⁻ ∗ ρ_ε` exact; otherwise it is spectral.
    pub fn mollify(&self, drift_grid: &GridSpec, epsilon: f64) -> Result<DriftField> {
        let time_independent = self.is_time_independent();
        let grid = if time_independent {
            drift_grid.with_time(0.0, 1.0, 1)?
        } else {
            *drift_grid
        };
        let samples = self.sample(&grid)?;
        let moll = Mollifier::new(&grid, epsilon)?;
        let sp = Spectral::new(&grid);
        let slices = if time_independent { 1 } else { grid.num_slices() };
        let nn = grid.num_nodes();
        let d = self.dim;
        let mut values = Vec::with_capacity(slices);
        let mut divs = Vec::with_capacity(slices);
        for k in 0..slices {
            let mut buf = Vec::with_capacity(d * nn);
            for c in 0..d {
                buf.extend(moll.apply_slice(samples.field.slice(k, c)));
            }
            let dv = match &samples.divergence {
                Some(dv) => moll.apply_slice(dv.slice(k, 0)),
                None => {
                    let comps: Vec<&[f64]> = (0..d).map(|c| &buf[c * nn..(c + 1) * nn]).collect();
                    sp.divergence(&comps)
                }
            };
            values.push(buf);
            divs.push(dv);
        }
        let times = if time_independent {
            vec![0.0]
        } else {
            (0..slices).map(|k| grid.time(k)).collect()
        };
        let sampled = SampledDrift {
            grid,
            times,
            values,
            divergence: Some(divs),
        };
        Ok(Self::from_sampled(sampled, self.provenance.clone(), Some(epsilon)))
    }

    /// Fails unless the drift is finite everywhere.
    pub fn require_regular(&self) -> Result<()> {
        if self.is_regular() {
            Ok(())
        } else {
            Err(Error::UnregularizedDrift)
        }
    }
}

/// Ratio `∫ρ(|y|)|y|^{-a} dy / ∫ρ(|y|) dy` over the unit ball in `d` dimensions
/// (infinite when `|y|^{-a}` is not locally integrable).
pub fn bump_moment(d: usize, a: f64) -> f64 {
    let beta = d as f64 - 1.0 - a;
    if beta <= -1.0 {
        return f64::INFINITY;
    }
    // r = u^m makes the integrand smooth at 0
    let m = (1.0 / (beta + 1.0)).ceil() + 1.0;
    let integral = |pow: f64| {
        let n = 4000;
        let hstep = 1.0 / n as f64;
        let f = |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            let r = u.powf(m);
            bump(r) * r.powf(pow) * m * u.powf(m - 1.0)
        };
        let mut s = f(0.0) + f(1.0);
        for i in 1..n {
            let u = i as f64 * hstep;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(u);
        }
        s * hstep / 3.0
    };
    integral(beta) / integral(d as f64 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_moment_of_zero_power_is_one() {
        for d in 1..=3 {
            assert!((bump_moment(d, 0.0) - 1.0).abs() < 1e-12);
        }
        // moments of |y|^{-a} grow with a
        assert!(bump_moment(3, 2.0) > bump_moment(3, 1.0));
    }

    #[test]
    fn mollified_ou_matches_linear_field_in_interior() {
        let g = GridSpec::new(1, 8.0, 128, 0.0, 1.0, 1).unwrap();
        let b = DriftField::ornstein_uhlenbeck(1, 1.0).mollify(&g, 0.3).unwrap();
        let mut out = [0.0];
        b.eval(0.5, &[0.7], &mut out);
        assert!((out[0] + 0.7).abs() < 1e-9);
        assert!((b.divergence(0.5, &[0.7]).unwrap() + 1.0).abs() < 1e-9);
        assert_eq!(b.mollification_level(), Some(0.3));
    }

    #[test]
    fn unmollified_singular_drift_is_not_regular() {
        assert!(!DriftField::radial(1.0, 3).is_regular());
        assert!(DriftField::radial(0.0, 3).is_regular());
        let g = GridSpec::new(3, 4.0, 16, 0.0, 1.0, 1).unwrap();
        let m = DriftField::radial(1.0, 3).mollify(&g, 0.5).unwrap();
        assert!(m.is_regular());
        assert!(DriftField::radial(1.0, 3).require_regular().is_err());
    }
}
