//! Periodic space-time grids and grid functions.
//!
//! Space is the periodic box `[-L/2, L/2)^d` sampled at `N` nodes per axis,
//! node `j` sitting at `-L/2 + j h`, so the origin is node `N/2`. Flat node
//! indices are row-major with the last axis fastest. Time is sampled at
//! `time_steps + 1` slices `t0 + k (t1 - t0) / time_steps`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"SDLF";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub spatial_dim: usize,
    pub extent: f64,
    pub points_per_axis: usize,
    pub time_start: f64,
    pub time_end: f64,
    pub time_steps: usize,
}

impl GridSpec {
    pub fn new(
        spatial_dim: usize,
        extent: f64,
        points_per_axis: usize,
        time_start: f64,
        time_end: f64,
        time_steps: usize,
    ) -> Result<Self> {
        let g = Self {
            spatial_dim,
            extent,
            points_per_axis,
            time_start,
            time_end,
            time_steps,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.points_per_axis;
        if self.spatial_dim == 0 {
            return Err(Error::InvalidGrid("spatial dimension must be at least 1".into()));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 4, got {n}"
            )));
        }
        if !(self.extent > 0.0 && self.extent.is_finite()) {
            return Err(Error::InvalidGrid(format!("extent must be positive, got {}", self.extent)));
        }
        if !(self.time_end > self.time_start) || !self.time_start.is_finite() || !self.time_end.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "time interval [{}, {}] is empty",
                self.time_start, self.time_end
            )));
        }
        if self.time_steps == 0 {
            return Err(Error::InvalidGrid("need at least one time step".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.spatial_dim
    }

    pub fn n(&self) -> usize {
        self.points_per_axis
    }

    /// Spatial mesh width `h = L / N`.
    pub fn h(&self) -> f64 {
        self.extent / self.points_per_axis as f64
    }

    /// Time spacing between stored slices.
    pub fn dt(&self) -> f64 {
        (self.time_end - self.time_start) / self.time_steps as f64
    }

    pub fn num_nodes(&self) -> usize {
        self.points_per_axis.pow(self.spatial_dim as u32)
    }

    pub fn num_slices(&self) -> usize {
        self.time_steps + 1
    }

    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.spatial_dim as i32)
    }

    pub fn time(&self, k: usize) -> f64 {
        self.time_start + k as f64 * self.dt()
    }

    pub fn coord(&self, j: usize) -> f64 {
        -0.5 * self.extent + j as f64 * self.h()
    }

    /// Multi-index of a flat node index.
    pub fn unflatten(&self, mut flat: usize, out: &mut [usize]) {
        let n = self.points_per_axis;
        for a in (0..self.spatial_dim).rev() {
            out[a] = flat % n;
            flat /= n;
        }
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.points_per_axis + i)
    }

    /// Physical coordinates of a flat node index.
    pub fn node_position(&self, flat: usize, out: &mut [f64]) {
        let n = self.points_per_axis;
        let mut f = flat;
        for a in (0..self.spatial_dim).rev() {
            out[a] = self.coord(f % n);
            f /= n;
        }
    }

    /// Flat index stride of one step along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.points_per_axis.pow((self.spatial_dim - 1 - axis) as u32)
    }

    /// Flat index of the periodic neighbour `flat ± e_axis`.
    pub fn shift(&self, flat: usize, axis: usize, forward: bool) -> usize {
        let n = self.points_per_axis;
        let s = self.stride(axis);
        let i = (flat / s) % n;
        if forward {
            if i + 1 == n {
                flat + s - n * s
            } else {
                flat + s
            }
        } else if i == 0 {
            flat + (n - 1) * s
        } else {
            flat - s
        }
    }

    /// Wrap a coordinate into `[-L/2, L/2)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let l = self.extent;
        let y = (x + 0.5 * l).rem_euclid(l) - 0.5 * l;
        if y >= 0.5 * l {
            y - l
        } else {
            y
        }
    }

    /// Index of the stored slice closest to `t`, if `t` lies in the horizon.
    pub fn slice_of(&self, t: f64) -> Option<usize> {
        let s = (t - self.time_start) / self.dt();
        let k = s.round();
        if (s - k).abs() < 1e-9 && k >= 0.0 && (k as usize) < self.num_slices() {
            Some(k as usize)
        } else {
            None
        }
    }

    /// Same space grid with a different time axis.
    pub fn with_time(&self, time_start: f64, time_end: f64, time_steps: usize) -> Result<Self> {
        Self::new(self.spatial_dim, self.extent, self.points_per_axis, time_start, time_end, time_steps)
    }

    /// Same box and time axis with `points_per_axis` replaced.
    pub fn with_points(&self, points_per_axis: usize) -> Result<Self> {
        Self::new(
            self.spatial_dim,
            self.extent,
            points_per_axis,
            self.time_start,
            self.time_end,
            self.time_steps,
        )
    }

    /// Periodic trapezoid weights in time (endpoints halved).
    pub fn time_weights(&self) -> Vec<f64> {
        let dt = self.dt();
        let k = self.num_slices();
        (0..k)
            .map(|i| if i == 0 || i + 1 == k { 0.5 * dt } else { dt })
            .collect()
    }
}

/// A scalar or vector field sampled on a [`GridSpec`].
///
/// Values are stored as `[slice][component][node]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    grid: GridSpec,
    components: usize,
    values: Vec<f64>,
}

impl SpaceTimeField {
    pub fn zeros(grid: GridSpec, components: usize) -> Self {
        let len = grid.num_slices() * components * grid.num_nodes();
        Self {
            grid,
            components,
            values: vec![0.0; len],
        }
    }

    /// Build from a raw value buffer, checking shape and finiteness.
    pub fn from_values(grid: GridSpec, components: usize, values: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        let expected = grid.num_slices() * components * grid.num_nodes();
        if components == 0 || values.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "expected {expected} values for {components} components, got {}",
                values.len()
            )));
        }
        let f = Self {
            grid,
            components,
            values,
        };
        f.check_finite("field values")?;
        Ok(f)
    }

    /// Sample a scalar function `f(t, x)`.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, &[f64]) -> f64) -> Self {
        let mut out = Self::zeros(grid, 1);
        let mut x = vec![0.0; grid.dim()];
        for k in 0..grid.num_slices() {
            let t = grid.time(k);
            let s = out.slice_mut(k, 0);
            for (j, v) in s.iter_mut().enumerate() {
                grid.node_position(j, &mut x);
                *v = f(t, &x);
            }
        }
        out
    }

    /// Sample a vector function writing `components` values into its output slice.
    pub fn from_vector_fn(grid: GridSpec, components: usize, f: impl Fn(f64, &[f64], &mut [f64])) -> Self {
        let mut out = Self::zeros(grid, components);
        let nn = grid.num_nodes();
        let mut x = vec![0.0; grid.dim()];
        let mut v = vec![0.0; components];
        for k in 0..grid.num_slices() {
            let t = grid.time(k);
            for j in 0..nn {
                grid.node_position(j, &mut x);
                f(t, &x, &mut v);
                for c in 0..components {
                    out.values[(k * components + c) * nn + j] = v[c];
                }
            }
        }
        out
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn slice(&self, k: usize, c: usize) -> &[f64] {
        let nn = self.grid.num_nodes();
        let off = (k * self.components + c) * nn;
        &self.values[off..off + nn]
    }

    pub fn slice_mut(&mut self, k: usize, c: usize) -> &mut [f64] {
        let nn = self.grid.num_nodes();
        let off = (k * self.components + c) * nn;
        &mut self.values[off..off + nn]
    }

    pub fn check_finite(&self, context: &str) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFinite {
                index,
                context: context.to_string(),
            }),
            None => Ok(()),
        }
    }

    pub fn require_scalar(&self) -> Result<()> {
        if self.components != 1 {
            return Err(Error::ShapeMismatch(format!(
                "expected a scalar field, got {} components",
                self.components
            )));
        }
        Ok(())
    }

    /// Pointwise Euclidean magnitude of a vector field (identity on scalars up to sign).
    pub fn magnitude(&self) -> Self {
        let nn = self.grid.num_nodes();
        let mut out = Self::zeros(self.grid, 1);
        for k in 0..self.grid.num_slices() {
            let dst = out.slice_mut(k, 0);
            for c in 0..self.components {
                let src = &self.values[(k * self.components + c) * nn..(k * self.components + c + 1) * nn];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += s * s;
                }
            }
            for d in dst.iter_mut() {
                *d = d.sqrt();
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            components: self.components,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid || self.components != other.components {
            return Err(Error::ShapeMismatch("fields live on different grids".into()));
        }
        Ok(Self {
            grid: self.grid,
            components: self.components,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// Extract one component as a scalar field.
    pub fn component(&self, c: usize) -> Self {
        let mut out = Self::zeros(self.grid, 1);
        for k in 0..self.grid.num_slices() {
            out.slice_mut(k, 0).copy_from_slice(self.slice(k, c));
        }
        out
    }

    /// Multilinear interpolation in `(t, x)`; space is periodic, time is clamped.
    pub fn interpolate(&self, t: f64, x: &[f64], out: &mut [f64]) {
        let g = &self.grid;
        let s = ((t - g.time_start) / g.dt()).clamp(0.0, g.time_steps as f64);
        let k0 = (s.floor() as usize).min(g.time_steps.saturating_sub(1));
        let wt = s - k0 as f64;
        for (c, o) in out.iter_mut().enumerate().take(self.components) {
            let a = interp_space(g, self.slice(k0, c), x);
            *o = if wt > 0.0 {
                (1.0 - wt) * a + wt * interp_space(g, self.slice(k0 + 1, c), x)
            } else {
                a
            };
        }
    }

    /// Forward-difference gradient `∂_i u` per slice (periodic), stored as `d` components.
    pub fn fd_gradient(&self) -> Result<Self> {
        self.require_scalar()?;
        let g = self.grid;
        let d = g.dim();
        let h = g.h();
        let mut out = Self::zeros(g, d);
        for k in 0..g.num_slices() {
            let u = self.slice(k, 0).to_vec();
            for a in 0..d {
                let dst = out.slice_mut(k, a);
                for (j, v) in dst.iter_mut().enumerate() {
                    *v = (u[g.shift(j, a, true)] - u[j]) / h;
                }
            }
        }
        Ok(out)
    }

    pub fn write_sdlf(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        let g = &self.grid;
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(VERSION)?;
        w.write_u32::<LittleEndian>(g.spatial_dim as u32)?;
        w.write_u32::<LittleEndian>(g.points_per_axis as u32)?;
        w.write_f64::<LittleEndian>(g.extent)?;
        w.write_u32::<LittleEndian>(g.time_steps as u32)?;
        w.write_f64::<LittleEndian>(g.time_start)?;
        w.write_f64::<LittleEndian>(g.time_end)?;
        w.write_u32::<LittleEndian>(self.components as u32)?;
        for &v in &self.values {
            w.write_f64::<LittleEndian>(v)?;
        }
        Ok(())
    }

    pub fn read_sdlf(path: &Path) -> Result<Self> {
        let bad = |reason: String| Error::Format {
            path: path.to_path_buf(),
            reason,
        };
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(bad("missing SDLF magic".into()));
        }
        let version = r.read_u32::<LittleEndian>()?;
        if version != VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        let d = r.read_u32::<LittleEndian>()? as usize;
        let n = r.read_u32::<LittleEndian>()? as usize;
        let l = r.read_f64::<LittleEndian>()?;
        let steps = r.read_u32::<LittleEndian>()? as usize;
        let t0 = r.read_f64::<LittleEndian>()?;
        let t1 = r.read_f64::<LittleEndian>()?;
        let comps = r.read_u32::<LittleEndian>()? as usize;
        let grid = GridSpec::new(d, l, n, t0, t1, steps).map_err(|e| bad(e.to_string()))?;
        let len = grid.num_slices() * comps * grid.num_nodes();
        let mut values = vec![0.0; len];
        r.read_f64_into::<LittleEndian>(&mut values)
            .map_err(|e| bad(format!("truncated payload: {e}")))?;
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(bad("trailing bytes after payload".into()));
        }
        Self::from_values(grid, comps, values)
    }
}

/// Periodic multilinear interpolation of one slice at `x`.
pub fn interp_space(g: &GridSpec, slice: &[f64], x: &[f64]) -> f64 {
    let d = g.dim();
    let n = g.n();
    let h = g.h();
    let mut base = [0usize; 8];
    let mut frac = [0.0f64; 8];
    debug_assert!(d <= 8);
    for a in 0..d {
        let s = (x[a] + 0.5 * g.extent) / h;
        let fl = s.floor();
        frac[a] = s - fl;
        base[a] = (fl as i64).rem_euclid(n as i64) as usize;
    }
    let mut acc = 0.0;
    for corner in 0..(1usize << d) {
        let mut w = 1.0;
        let mut flat = 0usize;
        for a in 0..d {
            let bit = (corner >> (d - 1 - a)) & 1;
            let i = if bit == 1 { (base[a] + 1) % n } else { base[a] };
            w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
            flat = flat * n + i;
        }
        if w != 0.0 {
            acc += w * slice[flat];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2() -> GridSpec {
        GridSpec::new(2, 4.0, 8, 0.0, 1.0, 4).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(1, 1.0, 6, 0.0, 1.0, 1).is_err());
        assert!(GridSpec::new(1, 1.0, 2, 0.0, 1.0, 1).is_err());
        assert!(GridSpec::new(1, 0.0, 8, 0.0, 1.0, 1).is_err());
        assert!(GridSpec::new(1, 1.0, 8, 1.0, 1.0, 1).is_err());
        assert!(GridSpec::new(1, 1.0, 8, 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn origin_is_middle_node() {
        let g = grid2();
        let mut x = [0.0; 2];
        g.node_position(g.flatten(&[4, 4]), &mut x);
        assert_eq!(x, [0.0, 0.0]);
        let mut idx = [0; 2];
        g.unflatten(g.flatten(&[3, 7]), &mut idx);
        assert_eq!(idx, [3, 7]);
    }

    #[test]
    fn periodic_shift_wraps() {
        let g = grid2();
        let j = g.flatten(&[7, 0]);
        assert_eq!(g.shift(j, 0, true), g.flatten(&[0, 0]));
        assert_eq!(g.shift(j, 1, false), g.flatten(&[7, 7]));
    }

    #[test]
    fn interpolation_reproduces_nodes_and_linear_data() {
        let g = grid2();
        let f = SpaceTimeField::from_fn(g, |t, x| t + 0.25 * x[0] - 0.5 * x[1]);
        let mut out = [0.0];
        f.interpolate(0.3, &[0.1, -0.7], &mut out);
        assert!((out[0] - (0.3 + 0.025 + 0.35)).abs() < 1e-12);
        f.interpolate(0.5, &[-2.0, 1.5], &mut out);
        assert!((out[0] - (0.5 - 0.5 - 0.75)).abs() < 1e-12);
    }

    #[test]
    fn sdlf_round_trip_is_bit_exact() {
        let g = grid2();
        let f = SpaceTimeField::from_vector_fn(g, 2, |t, x, v| {
            v[0] = (t * x[0]).sin();
            v[1] = x[1].exp();
        });
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.sdlf");
        f.write_sdlf(&p).unwrap();
        let back = SpaceTimeField::read_sdlf(&p).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn non_finite_values_rejected() {
        let g = grid2();
        let mut v = vec![0.0; g.num_slices() * g.num_nodes()];
        v[3] = f64::NAN;
        assert!(matches!(
            SpaceTimeField::from_values(g, 1, v),
            Err(Error::NonFinite { index: 3, .. })
        ));
    }
}
