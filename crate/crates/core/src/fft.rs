//! Spectral operations on one time slice of a periodic grid.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::GridSpec;

/// Multidimensional FFT helper bound to a grid's spatial layout.
pub struct Spectral {
    grid: GridSpec,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Signed physical wavenumber per axis index.
    k: Vec<f64>,
}

impl Spectral {
    pub fn new(grid: &GridSpec) -> Self {
        let n = grid.n();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let k = (0..n)
            .map(|m| {
                let m = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
                2.0 * PI * m / grid.extent
            })
            .collect();
        Self {
            grid: *grid,
            fwd,
            inv,
            k,
        }
    }

    pub fn wavenumber(&self, m: usize) -> f64 {
        self.k[m]
    }

    fn transform(&self, data: &mut [Complex64], forward: bool) {
        let g = &self.grid;
        let n = g.n();
        let plan = if forward { &self.fwd } else { &self.inv };
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for axis in 0..g.dim() {
            let stride = g.stride(axis);
            for start in 0..g.num_nodes() {
                // visit each line once: its first element has axis index 0
                if (start / stride) % n != 0 {
                    continue;
                }
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[start + i * stride];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for (i, v) in line.iter().enumerate() {
                    data[start + i * stride] = *v;
                }
            }
        }
        if !forward {
            let scale = 1.0 / g.num_nodes() as f64;
            for v in data.iter_mut() {
                *v *= scale;
            }
        }
    }

    pub fn forward(&self, real: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = real.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, true);
        data
    }

    /// Inverse transform, returning the real part.
    pub fn inverse_real(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut spec, false);
        spec.into_iter().map(|c| c.re).collect()
    }

    /// Apply a Fourier multiplier `m(|k|^2)`.
    pub fn radial_multiplier(&self, real: &[f64], m: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut spec = self.forward(real);
        let g = &self.grid;
        let mut idx = vec![0usize; g.dim()];
        for (j, v) in spec.iter_mut().enumerate() {
            g.unflatten(j, &mut idx);
            let k2: f64 = idx.iter().map(|&m| self.k[m] * self.k[m]).sum();
            *v *= m(k2);
        }
        self.inverse_real(spec)
    }

    /// Apply a real multiplier given per Fourier mode (flat index as the grid).
    pub fn apply_symbol(&self, real: &[f64], symbol: &[f64]) -> Vec<f64> {
        let mut spec = self.forward(real);
        for (v, s) in spec.iter_mut().zip(symbol) {
            *v *= s;
        }
        self.inverse_real(spec)
    }

    /// Symbol of the second-order difference Laplacian `Σₐ (2cos(kₐh) − 2)/h²`.
    pub fn difference_laplacian_symbol(&self) -> Vec<f64> {
        let g = &self.grid;
        let h = g.h();
        let mut idx = vec![0usize; g.dim()];
        (0..g.num_nodes())
            .map(|j| {
                g.unflatten(j, &mut idx);
                idx.iter().map(|&m| (2.0 * (self.k[m] * h).cos() - 2.0) / (h * h)).sum()
            })
            .collect()
    }

    /// Spectral partial derivative along `axis` (Nyquist mode dropped).
    pub fn derivative(&self, real: &[f64], axis: usize) -> Vec<f64> {
        let mut spec = self.forward(real);
        self.derivative_in_place(&mut spec, axis);
        self.inverse_real(spec)
    }

    fn derivative_in_place(&self, spec: &mut [Complex64], axis: usize) {
        let g = &self.grid;
        let n = g.n();
        let stride = g.stride(axis);
        for (j, v) in spec.iter_mut().enumerate() {
            let m = (j / stride) % n;
            if m == n / 2 {
                *v = Complex64::new(0.0, 0.0);
            } else {
                *v *= Complex64::new(0.0, self.k[m]);
            }
        }
    }

    /// Spectral divergence of `d` component slices.
    pub fn divergence(&self, comps: &[&[f64]]) -> Vec<f64> {
        let nn = self.grid.num_nodes();
        let mut acc = vec![Complex64::new(0.0, 0.0); nn];
        for (axis, c) in comps.iter().enumerate() {
            let mut spec = self.forward(c);
            self.derivative_in_place(&mut spec, axis);
            for (a, s) in acc.iter_mut().zip(&spec) {
                *a += s;
            }
        }
        self.inverse_real(acc)
    }

    /// Periodic circular convolution of `real` with `kernel`, both indexed by node
    /// displacement from node 0 (kernel value at displacement index `m` along each axis).
    pub fn convolve(&self, real: &[f64], kernel_hat: &[Complex64]) -> Vec<f64> {
        let mut spec = self.forward(real);
        for (s, k) in spec.iter_mut().zip(kernel_hat) {
            *s *= k;
        }
        self.inverse_real(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_identity() {
        let g = GridSpec::new(2, 3.0, 8, 0.0, 1.0, 1).unwrap();
        let sp = Spectral::new(&g);
        let data: Vec<f64> = (0..64).map(|i| ((i * 37) % 11) as f64 - 3.0).collect();
        let back = sp.inverse_real(sp.forward(&data));
        for (a, b) in data.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_of_mode() {
        let g = GridSpec::new(2, 2.0, 16, 0.0, 1.0, 1).unwrap();
        let sp = Spectral::new(&g);
        let mut x = [0.0; 2];
        let k = PI;
        let f: Vec<f64> = (0..g.num_nodes())
            .map(|j| {
                g.node_position(j, &mut x);
                (k * x[1]).sin()
            })
            .collect();
        let df = sp.derivative(&f, 1);
        for j in 0..g.num_nodes() {
            g.node_position(j, &mut x);
            assert!((df[j] - k * (k * x[1]).cos()).abs() < 1e-10);
        }
        let d0 = sp.derivative(&f, 0);
        assert!(d0.iter().all(|v| v.abs() < 1e-10));
    }
}
