//! Localized norms `sup_{s,z} ‖f χ_r^{s,z}‖_{α,p;q}` over a cutoff lattice.
//!
//! The time factor of the cutoff commutes with `(I−Δ)^{α/2}`, so the spatial
//! part is computed once per slice and center, then combined in time for every
//! time center. For `α = 0` and finite `p` all spatial centers come from one
//! FFT correlation of `|f|^p` with `χ^p`.

use crate::error::{Error, Result};
use crate::fft::Spectral;
use crate::grid::{GridSpec, SpaceTimeField};

use super::cutoff::{chi_space, chi_time, CutoffFamily};
use super::{bessel_slice, lp_slice, lq_time, NormSpec};

/// Maximizing center of a localized norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizedValue {
    pub value: f64,
    pub time_center: f64,
    pub space_center: usize,
}

/// Spatial window `χ(|y|/r)` indexed by periodic displacement from node 0.
pub(crate) fn window(grid: &GridSpec, r: f64) -> Vec<f64> {
    let h = grid.h();
    let n = grid.n() as i64;
    let mut idx = vec![0usize; grid.dim()];
    (0..grid.num_nodes())
        .map(|j| {
            grid.unflatten(j, &mut idx);
            let d2: f64 = idx
                .iter()
                .map(|&i| {
                    let m = if (i as i64) < n / 2 { i as i64 } else { i as i64 - n };
                    (m as f64 * h).powi(2)
                })
                .sum();
            chi_space(d2.sqrt() / r)
        })
        .collect()
}

/// Nonzero window entries as (displacement index vector, weight).
fn window_offsets(grid: &GridSpec, w: &[f64]) -> Vec<(Vec<i64>, f64)> {
    let n = grid.n() as i64;
    let mut idx = vec![0usize; grid.dim()];
    w.iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(j, &v)| {
            grid.unflatten(j, &mut idx);
            let m = idx
                .iter()
                .map(|&i| if (i as i64) < n / 2 { i as i64 } else { i as i64 - n })
                .collect();
            (m, v)
        })
        .collect()
}

fn offset_node(grid: &GridSpec, base: usize, off: &[i64], scratch: &mut [usize]) -> usize {
    let n = grid.n() as i64;
    grid.unflatten(base, scratch);
    for (s, o) in scratch.iter_mut().zip(off) {
        *s = (*s as i64 + o).rem_euclid(n) as usize;
    }
    grid.flatten(scratch)
}

/// Spatial norms `A[k][c] = ‖(I−Δ)^{α/2}(f_k χ(·−z_c))‖_p` for every slice and center.
pub fn spatial_center_norms(f: &SpaceTimeField, alpha: f64, p: f64, r: f64, centers: &[usize]) -> Result<Vec<Vec<f64>>> {
    let g = *f.grid();
    let mag;
    let f = if f.components() > 1 {
        if alpha != 0.0 {
            return Err(Error::InvalidArgument("Bessel norms of vector fields need alpha = 0".into()));
        }
        mag = f.magnitude();
        &mag
    } else {
        f
    };
    let w = window(&g, r);
    let vol = g.cell_volume();
    let sp = Spectral::new(&g);
    let mut out = Vec::with_capacity(g.num_slices());
    if alpha == 0.0 && p.is_finite() {
        let wp: Vec<f64> = w.iter().map(|v| v.powf(p)).collect();
        let kernel_hat = sp.forward(&wp);
        for k in 0..g.num_slices() {
            let fp: Vec<f64> = f.slice(k, 0).iter().map(|v| v.abs().powf(p)).collect();
            if fp.iter().all(|&v| v == 0.0) {
                out.push(vec![0.0; centers.len()]);
                continue;
            }
            let conv = sp.convolve(&fp, &kernel_hat);
            out.push(centers.iter().map(|&c| (conv[c].max(0.0) * vol).powf(1.0 / p)).collect());
        }
    } else if alpha == 0.0 {
        let offs = window_offsets(&g, &w);
        let mut scratch = vec![0usize; g.dim()];
        for k in 0..g.num_slices() {
            let s = f.slice(k, 0);
            out.push(
                centers
                    .iter()
                    .map(|&c| {
                        offs.iter().fold(0.0f64, |m, (o, wv)| {
                            m.max(s[offset_node(&g, c, o, &mut scratch)].abs() * wv)
                        })
                    })
                    .collect(),
            );
        }
    } else {
        let mut scratch = vec![0usize; g.dim()];
        let mut shifted = vec![0.0; g.num_nodes()];
        let mut idx = vec![0usize; g.dim()];
        let n = g.n();
        for k in 0..g.num_slices() {
            let s = f.slice(k, 0);
            let mut row = Vec::with_capacity(centers.len());
            for &c in centers {
                g.unflatten(c, &mut idx);
                for (j, v) in shifted.iter_mut().enumerate() {
                    // displacement j - c
                    g.unflatten(j, &mut scratch);
                    let mut flat = 0;
                    for a in 0..g.dim() {
                        flat = flat * n + (scratch[a] + n - idx[a]) % n;
                    }
                    *v = s[j] * w[flat];
                }
                row.push(lp_slice(&bessel_slice(&sp, &shifted, alpha), p, vol));
            }
            out.push(row);
        }
    }
    Ok(out)
}

/// Localized norm with its maximizing center.
pub fn localized_norm_detail(f: &SpaceTimeField, spec: &NormSpec, fam: &CutoffFamily) -> Result<LocalizedValue> {
    spec.validate()?;
    f.check_finite("localized norm input")?;
    if fam.is_empty() {
        return Err(Error::EmptyLattice);
    }
    let g = *f.grid();
    let r = fam.radius;
    let a = spatial_center_norms(f, spec.alpha, spec.p, r, &fam.space_centers)?;
    let weights = g.time_weights();
    let mut best = LocalizedValue {
        value: 0.0,
        time_center: fam.time_centers[0],
        space_center: fam.space_centers[0],
    };
    let mut vals = vec![0.0; g.num_slices()];
    for &s in &fam.time_centers {
        let tw: Vec<f64> = (0..g.num_slices()).map(|k| chi_time((g.time(k) - s) / (r * r))).collect();
        for (ci, &c) in fam.space_centers.iter().enumerate() {
            for k in 0..g.num_slices() {
                vals[k] = tw[k] * a[k][ci];
            }
            let v = lq_time(&vals, &weights, spec.q);
            if v > best.value {
                best = LocalizedValue {
                    value: v,
                    time_center: s,
                    space_center: c,
                };
            }
        }
    }
    Ok(best)
}

/// `sup_{s,z} ‖f χ_r^{s,z}‖_{α,p;q}` over the lattice `fam` (a lower bound of the continuum sup).
pub fn localized_norm(f: &SpaceTimeField, spec: &NormSpec, fam: &CutoffFamily) -> Result<f64> {
    Ok(localized_norm_detail(f, spec, fam)?.value)
}

/// Localized norm over the default lattice built from `spec.cutoff_radius`.
pub fn localized_norm_default(f: &SpaceTimeField, spec: &NormSpec) -> Result<f64> {
    let fam = CutoffFamily::new(f.grid(), spec.cutoff_radius)?;
    localized_norm(f, spec, &fam)
}

/// `‖f χ_r^{s,z}‖_{α,p;q}` for one cutoff.
pub fn cutoff_norm(f: &SpaceTimeField, spec: &NormSpec, s: f64, z: usize) -> Result<f64> {
    localized_norm(f, spec, &CutoffFamily::single(spec.cutoff_radius, s, z))
}
