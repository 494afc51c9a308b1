//! Periodic lattice of point singularities
//! `b(x) = Σ_z γ_z (x−z)|x−z|^{-α} φ(|x−z|)` over integer points `z`,
//! with `φ = 1` on `[0,1]` and `φ = 0` on `[2, ∞)`.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::norms::cutoff::{smooth_step, smooth_step_deriv};

use super::{bump_moment, DriftField, Provenance, Repr};

#[derive(Debug, Clone)]
pub struct LatticeDrift {
    dim: usize,
    alpha: f64,
    period: usize,
    /// Weights `γ_z` indexed by `z mod period`, row-major.
    gamma: Vec<f64>,
}

fn phi(r: f64) -> f64 {
    smooth_step(r - 1.0)
}

fn phi_deriv(r: f64) -> f64 {
    smooth_step_deriv(r - 1.0)
}

impl LatticeDrift {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub(super) fn is_trivial(&self) -> bool {
        self.gamma.iter().all(|&g| g == 0.0)
    }

    fn gamma_at(&self, z: &[i64]) -> f64 {
        let p = self.period as i64;
        let idx = z.iter().fold(0usize, |acc, &zi| acc * self.period + zi.rem_euclid(p) as usize);
        self.gamma[idx]
    }

    /// Visit every lattice point within distance 2 of `x`.
    fn for_each_near(&self, x: &[f64], mut f: impl FnMut(&[i64], f64)) {
        let d = self.dim;
        let lo: Vec<i64> = x.iter().map(|&xi| (xi - 2.0).ceil() as i64).collect();
        let hi: Vec<i64> = x.iter().map(|&xi| (xi + 2.0).floor() as i64).collect();
        let mut z = lo.clone();
        loop {
            let r2: f64 = x.iter().zip(&z).map(|(&a, &b)| (a - b as f64).powi(2)).sum();
            if r2 < 4.0 {
                f(&z, r2.sqrt());
            }
            let mut a = d;
            loop {
                if a == 0 {
                    return;
                }
                a -= 1;
                if z[a] < hi[a] {
                    z[a] += 1;
                    break;
                }
                z[a] = lo[a];
            }
        }
    }

    pub(super) fn eval(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        self.for_each_near(x, |z, r| {
            if r == 0.0 {
                return;
            }
            let w = self.gamma_at(z) * r.powf(-self.alpha) * phi(r);
            for ((o, &xi), &zi) in out.iter_mut().zip(x).zip(z) {
                *o += w * (xi - zi as f64);
            }
        });
    }

    pub(super) fn divergence(&self, x: &[f64]) -> f64 {
        let d = self.dim as f64;
        let mut s = 0.0;
        self.for_each_near(x, |z, r| {
            let g = self.gamma_at(z);
            if r == 0.0 {
                s += if g == 0.0 || self.alpha <= 0.0 { g * d } else { f64::INFINITY * g.signum() };
                return;
            }
            s += g * ((d - self.alpha) * r.powf(-self.alpha) * phi(r) + r.powf(1.0 - self.alpha) * phi_deriv(r));
        });
        s
    }

    pub(super) fn singular_points(&self) -> Vec<Vec<f64>> {
        let d = self.dim;
        let p = self.period;
        let half = (p / 2) as i64;
        (0..p.pow(d as u32))
            .map(|mut m| {
                let mut z = vec![0.0; d];
                for a in (0..d).rev() {
                    z[a] = ((m % p) as i64 - half) as f64;
                    m /= p;
                }
                z
            })
            .collect()
    }

    /// Divergence at a node on a lattice point, mollified at level `h`: the
    /// singular term `γ (d−α) |y|^{-α}` is averaged against `ρ_h`, the
    /// neighbouring terms are smooth there and evaluated directly.
    pub(super) fn singular_node_divergence(&self, h: f64, x: &[f64]) -> f64 {
        let d = self.dim as f64;
        let mut s = 0.0;
        self.for_each_near(x, |z, r| {
            let g = self.gamma_at(z);
            if r < 0.5 * h {
                s += g * (d - self.alpha) * bump_moment(self.dim, self.alpha) * h.powf(-self.alpha);
            } else {
                s += g * ((d - self.alpha) * r.powf(-self.alpha) * phi(r) + r.powf(1.0 - self.alpha) * phi_deriv(r));
            }
        });
        s
    }
}

impl DriftField {
    /// Lattice field with `γ_z` drawn i.i.d. uniform on `(0, gamma_max)` from `seed`.
    pub fn lattice(gamma_max: f64, alpha: f64, dim: usize, period: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gamma = (0..period.pow(dim as u32))
            .map(|_| gamma_max * rng.sample::<f64, _>(Open01))
            .collect();
        let mut b = Self::lattice_from_weights(alpha, dim, period, gamma)?;
        b.provenance = Provenance::Lattice {
            gamma_max,
            alpha,
            seed,
            period,
        };
        Ok(b)
    }

    /// Lattice field with explicit weights indexed by `z mod period` (row-major).
    pub fn lattice_from_weights(alpha: f64, dim: usize, period: usize, gamma: Vec<f64>) -> Result<Self> {
        if alpha >= 3.0 {
            return Err(Error::InvalidArgument(format!(
                "singularity exponent must be below 3, got {alpha}"
            )));
        }
        if period < 4 {
            return Err(Error::InvalidArgument(format!(
                "lattice period must be at least 4 so supports do not overlap themselves, got {period}"
            )));
        }
        if gamma.len() != period.pow(dim as u32) {
            return Err(Error::ShapeMismatch(format!(
                "expected {} weights, got {}",
                period.pow(dim as u32),
                gamma.len()
            )));
        }
        let gamma_max = gamma.iter().fold(0.0f64, |m, &g| m.max(g));
        Ok(Self {
            dim,
            provenance: Provenance::Lattice {
                gamma_max,
                alpha,
                seed: 0,
                period,
            },
            mollification_level: None,
            repr: Repr::Lattice(std::sync::Arc::new(LatticeDrift {
                dim,
                alpha,
                period,
                gamma,
            })),
        })
    }

    /// The lattice data, when this drift is an unmollified lattice field.
    pub fn as_lattice(&self) -> Option<&LatticeDrift> {
        match &self.repr {
            Repr::Lattice(l) => Some(l),
            _ => None,
        }
    }
}
