//! Spatial mollification `f ∗ ρ_ε` with the compactly supported bump
//! `ρ(y) = exp(−1/(1−|y|²))` on the unit ball.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Spectral;
use crate::grid::{GridSpec, SpaceTimeField};

/// Unnormalized bump profile `ρ(|y|)`.
pub fn bump(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r * r)).exp()
    }
}

/// Discrete mollifier on a grid: kernel sampled at node displacements and
/// normalized to unit sum, kept in Fourier space for repeated use.
pub struct Mollifier {
    grid: GridSpec,
    epsilon: f64,
    spectral: Spectral,
    kernel_hat: Vec<Complex64>,
}

impl Mollifier {
    pub fn new(grid: &GridSpec, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!("mollification level must be positive, got {epsilon}")));
        }
        if epsilon <= grid.h() {
            log::warn!(
                "mollification level {epsilon} does not exceed the grid spacing {}; kernel is under-resolved",
                grid.h()
            );
        }
        let n = grid.n() as i64;
        let h = grid.h();
        let mut idx = vec![0usize; grid.dim()];
        let mut kernel: Vec<f64> = (0..grid.num_nodes())
            .map(|j| {
                grid.unflatten(j, &mut idx);
                let d2: f64 = idx
                    .iter()
                    .map(|&i| {
                        let m = if (i as i64) < n / 2 { i as i64 } else { i as i64 - n };
                        (m as f64 * h).powi(2)
                    })
                    .sum();
                bump(d2.sqrt() / epsilon)
            })
            .collect();
        let total: f64 = kernel.iter().sum();
        for v in kernel.iter_mut() {
            *v /= total;
        }
        let spectral = Spectral::new(grid);
        let mut kernel_hat = spectral.forward(&kernel);
        // the kernel is even, so its transform is real up to round-off
        for v in kernel_hat.iter_mut() {
            v.im = 0.0;
        }
        Ok(Self {
            grid: *grid,
            epsilon,
            spectral,
            kernel_hat,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Mollify one slice.
    pub fn apply_slice(&self, slice: &[f64]) -> Vec<f64> {
        self.spectral.convolve(slice, &self.kernel_hat)
    }

    /// Mollify every slice and component of `f`.
    pub fn apply(&self, f: &SpaceTimeField) -> Result<SpaceTimeField> {
        if f.grid().dim() != self.grid.dim() || f.grid().n() != self.grid.n() || f.grid().extent != self.grid.extent {
            return Err(Error::ShapeMismatch("mollifier built for a different grid".into()));
        }
        f.check_finite("mollify input")?;
        let mut out = SpaceTimeField::zeros(*f.grid(), f.components());
        for k in 0..f.grid().num_slices() {
            for c in 0..f.components() {
                let v = self.apply_slice(f.slice(k, c));
                out.slice_mut(k, c).copy_from_slice(&v);
            }
        }
        Ok(out)
    }
}

/// `f ∗ ρ_ε` slice by slice.
pub fn mollify(f: &SpaceTimeField, epsilon: f64) -> Result<SpaceTimeField> {
    Mollifier::new(f.grid(), epsilon)?.apply(f)
}
