//! Ingesting velocity fields stored as SDLF files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Spectral;
use crate::grid::{GridSpec, SpaceTimeField};

use super::{DriftField, Provenance, SampledDrift};

/// Energy-class quantities `‖u‖_{L^∞(L²)}` and `‖∇u‖_{L²(L²)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyClass {
    pub sup_l2: f64,
    pub grad_l2_l2: f64,
}

/// Energy-class norms of a vector field (spectral gradient, trapezoid in time).
pub fn energy_class(u: &SpaceTimeField) -> EnergyClass {
    let g = *u.grid();
    let sp = Spectral::new(&g);
    let vol = g.cell_volume();
    let w = g.time_weights();
    let mut sup_l2: f64 = 0.0;
    let mut grad = 0.0;
    for k in 0..g.num_slices() {
        let mut l2 = 0.0;
        let mut g2 = 0.0;
        for c in 0..u.components() {
            let s = u.slice(k, c);
            l2 += s.iter().map(|v| v * v).sum::<f64>();
            for a in 0..g.dim() {
                g2 += sp.derivative(s, a).iter().map(|v| v * v).sum::<f64>();
            }
        }
        sup_l2 = sup_l2.max((l2 * vol).sqrt());
        grad += w[k] * g2 * vol;
    }
    EnergyClass {
        sup_l2,
        grad_l2_l2: grad.sqrt(),
    }
}

fn split_slices(f: &SpaceTimeField) -> Vec<Vec<f64>> {
    let g = f.grid();
    (0..g.num_slices())
        .map(|k| (0..f.components()).flat_map(|c| f.slice(k, c).iter().copied()).collect())
        .collect()
}

/// Load a drift from an SDLF file with `d` components on the spatial grid of `grid`.
///
/// The divergence comes from `divergence_path` when given, otherwise from
/// spectral differentiation of each slice.
pub fn load_external(path: &Path, grid: &GridSpec, divergence_path: Option<&Path>) -> Result<(DriftField, EnergyClass)> {
    let field = SpaceTimeField::read_sdlf(path)?;
    let fg = *field.grid();
    if fg.dim() != grid.dim() || fg.n() != grid.n() || fg.extent != grid.extent {
        return Err(Error::ShapeMismatch(format!(
            "{} holds a d={} N={} L={} grid, expected d={} N={} L={}",
            path.display(),
            fg.dim(),
            fg.n(),
            fg.extent,
            grid.dim(),
            grid.n(),
            grid.extent
        )));
    }
    if field.components() != fg.dim() {
        return Err(Error::ShapeMismatch(format!(
            "{} has {} components for a {}-dimensional drift",
            path.display(),
            field.components(),
            fg.dim()
        )));
    }
    let divergence = match divergence_path {
        Some(p) => {
            let dv = SpaceTimeField::read_sdlf(p)?;
            if dv.grid() != &fg || dv.components() != 1 {
                return Err(Error::ShapeMismatch(format!(
                    "divergence file {} does not match the drift grid",
                    p.display()
                )));
            }
            split_slices(&dv)
        }
        None => {
            let sp = Spectral::new(&fg);
            (0..fg.num_slices())
                .map(|k| {
                    let comps: Vec<&[f64]> = (0..fg.dim()).map(|c| field.slice(k, c)).collect();
                    sp.divergence(&comps)
                })
                .collect()
        }
    };
    let energy = energy_class(&field);
    let times = (0..fg.num_slices()).map(|k| fg.time(k)).collect();
    let sampled = SampledDrift {
        grid: fg,
        times,
        values: split_slices(&field),
        divergence: Some(divergence),
    };
    let prov = Provenance::External {
        path: path.display().to_string(),
    };
    Ok((DriftField::from_sampled(sampled, prov, None), energy))
}
