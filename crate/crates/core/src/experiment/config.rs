//! Experiment definitions in TOML. Unknown keys are errors and the schema
//! carries a version number.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::drift::DriftField;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, SpaceTimeField};
use crate::norms::NormSpec;
use crate::pde::SolverConfig;
use crate::sde::martingale::{Probe, TestFunction};
use crate::sde::weak_conv::Observable;

pub const SCHEMA_VERSION: u32 = 1;

fn default_sigma() -> f64 {
    std::f64::consts::SQRT_2
}

fn default_k() -> f64 {
    3.0
}

fn default_alpha() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Master seed; every stochastic stage derives its seed from it.
    pub seed: u64,
    /// Output directory (default `runs/<name>`).
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub drift: DriftSpec,
    /// Space-time grid of the PDE stages.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub mollification: Option<MollificationSpec>,
    #[serde(default)]
    pub source: Option<SourceSpec>,
    /// Norm exponents for the drift, divergence and source groups.
    #[serde(default)]
    pub norms: Vec<NormSpec>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub ensemble: Option<EnsembleSpec>,
    pub verifiers: Vec<VerifierSpec>,
}

/// Drift catalog entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriftSpec {
    Zero { dim: usize },
    Radial { c: f64, dim: usize },
    Lattice { gamma_max: f64, alpha: f64, dim: usize, period: usize, seed: u64 },
    External { path: PathBuf, #[serde(default)] divergence: Option<PathBuf> },
    OrnsteinUhlenbeck { a: f64, dim: usize },
    Constant { v: Vec<f64> },
    /// With `ingest`, the field is sampled to an SDLF file and read back as an external field.
    TaylorGreen { #[serde(default)] ingest: bool },
}

impl DriftSpec {
    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::Zero { dim } | Self::Radial { dim, .. } | Self::Lattice { dim, .. } | Self::OrnsteinUhlenbeck { dim, .. } => Some(*dim),
            Self::Constant { v } => Some(v.len()),
            Self::TaylorGreen { .. } => Some(2),
            Self::External { .. } => None,
        }
    }

    /// Build the catalog field (external fields are loaded on `grid`).
    pub fn build(&self, grid: Option<&GridSpec>, base: &Path) -> Result<DriftField> {
        Ok(match self {
            Self::Zero { dim } => DriftField::zero(*dim),
            Self::Radial { c, dim } => {
                if *dim < 2 {
                    return Err(Error::Config("the radial drift needs dim >= 2".into()));
                }
                DriftField::radial(*c, *dim)
            }
            Self::Lattice { gamma_max, alpha, dim, period, seed } => DriftField::lattice(*gamma_max, *alpha, *dim, *period, *seed)?,
            Self::External { path, divergence } => {
                let g = grid.ok_or_else(|| Error::Config("an external drift needs a grid".into()))?;
                let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
                let dp = divergence.as_deref().map(resolve);
                crate::drift::external::load_external(&resolve(path), g, dp.as_deref())?.0
            }
            Self::OrnsteinUhlenbeck { a, dim } => DriftField::ornstein_uhlenbeck(*dim, *a),
            Self::Constant { v } => DriftField::constant(v.clone()),
            Self::TaylorGreen { .. } => DriftField::taylor_green(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MollificationSpec {
    /// Levels, largest first.
    pub levels: Vec<f64>,
    /// Points per axis of the grid on which the drift is mollified.
    pub drift_points: usize,
}

/// Time-independent source `f ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    Constant { value: f64 },
    /// `amp · exp(−|x|²/width²)`.
    Gaussian { width: f64, amp: f64 },
}

impl SourceSpec {
    pub fn field(&self, grid: GridSpec) -> SpaceTimeField {
        match *self {
            Self::Constant { value } => SpaceTimeField::from_fn(grid, |_, _| value),
            Self::Gaussian { width, amp } => SpaceTimeField::from_fn(grid, |_, x| amp * (-x.iter().map(|v| v * v).sum::<f64>() / (width * width)).exp()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub start: Vec<f64>,
    #[serde(default)]
    pub start_time: f64,
    pub horizon: f64,
    pub dt: f64,
    pub paths: usize,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub record_every: usize,
    /// Mollification level of the drift used for the stored ensemble.
    #[serde(default)]
    pub epsilon: Option<f64>,
}

/// One verifier with its tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VerifierSpec {
    /// Per-coordinate variance of `X_T − x` within `k·se` of the Brownian value `2(T − s)`.
    Variance {
        #[serde(default = "default_k")]
        k: f64,
    },
    /// KS test of every marginal at the horizon against the exact law (zero or OU drift).
    DensityKs {
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    /// Mean and variance of a one-dimensional OU ensemble against closed forms.
    Moments {
        #[serde(default = "default_k")]
        k: f64,
    },
    /// `f ≥ 0 ⇒ u ≥ 0` for every PDE solution.
    MaxPrinciple,
    /// Strictly decreasing distances along the ladder and bounded sup norms.
    Stability { region_radius: f64 },
    /// `sup|u_ε| / ‖|f‖|` within `max_spread` across levels and `refinement_tol` under `N → 2N`.
    GlobalMax { max_spread: f64, refinement_tol: f64 },
    /// PDE against path integrals on a `3 × 3` panel.
    FeynmanKac { epsilon: Option<f64>, panel_radius: f64, dt: f64, paths: usize },
    DeGiorgi { epsilon: Option<f64>, center_time: f64, radius: f64 },
    Krylov {
        epsilon: Option<f64>,
        starts: usize,
        panel_radius: f64,
        deltas: Vec<f64>,
        bump_width: f64,
        dt: f64,
        paths: usize,
    },
    Khasminskii { epsilon: Option<f64>, lambdas: Vec<f64>, bump_width: f64, dt: f64, paths: usize },
    Jacobian { epsilon: Option<f64>, end_time: f64, width: f64, dt: f64, paths: usize, #[serde(default)] box_extent: Option<f64> },
    Martingale {
        epsilon: Option<f64>,
        test: TestFunction,
        t0: f64,
        t1: f64,
        probes: Vec<Probe>,
        #[serde(default)]
        weak_order_dts: Vec<f64>,
    },
    Markov { epsilon: Option<f64>, t0: f64, observable: Observable, seeds: usize },
    WeakConvergence { observables: Vec<Observable>, modulus_deltas: Vec<f64>, theta: f64 },
}

impl VerifierSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Variance { .. } => "variance",
            Self::DensityKs { .. } => "density_ks",
            Self::Moments { .. } => "moments",
            Self::MaxPrinciple => "max_principle",
            Self::Stability { .. } => "stability",
            Self::GlobalMax { .. } => "global_max",
            Self::FeynmanKac { .. } => "feynman_kac",
            Self::DeGiorgi { .. } => "de_giorgi",
            Self::Krylov { .. } => "krylov",
            Self::Khasminskii { .. } => "khasminskii",
            Self::Jacobian { .. } => "jacobian",
            Self::Martingale { .. } => "martingale",
            Self::Markov { .. } => "markov",
            Self::WeakConvergence { .. } => "weak_convergence",
        }
    }

    fn needs_pde(&self) -> bool {
        matches!(
            self,
            Self::MaxPrinciple | Self::Stability { .. } | Self::GlobalMax { .. } | Self::FeynmanKac { .. } | Self::DeGiorgi { .. }
        )
    }

    fn needs_ensemble(&self) -> bool {
        matches!(self, Self::Variance { .. } | Self::DensityKs { .. } | Self::Moments { .. })
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(serde_json::to_vec(self)?)))
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from("runs").join(&self.name))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.version != SCHEMA_VERSION {
            return bad(format!("schema version {} is not supported (expected {SCHEMA_VERSION})", self.version));
        }
        if self.name.is_empty() {
            return bad("empty scenario name".into());
        }
        if let Some(g) = &self.grid {
            g.validate().map_err(|e| Error::Config(e.to_string()))?;
            if let Some(d) = self.drift.dim() {
                if d != g.dim() {
                    return bad(format!("drift dimension {d} does not match the grid dimension {}", g.dim()));
                }
            }
        }
        if let Some(m) = &self.mollification {
            if m.levels.is_empty() || m.levels.iter().any(|e| !(*e > 0.0)) {
                return bad("mollification levels must be positive".into());
            }
            if m.drift_points < 4 || !m.drift_points.is_power_of_two() {
                return bad("drift_points must be a power of two >= 4".into());
            }
            if self.grid.is_none() {
                return bad("mollification needs a grid (its extent fixes the drift box)".into());
            }
        }
        for n in &self.norms {
            n.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        if let Some(e) = &self.ensemble {
            if let Some(d) = self.drift.dim() {
                if e.start.len() != d {
                    return bad(format!("ensemble start has {} coordinates, drift has {d}", e.start.len()));
                }
            }
            if !(e.dt > 0.0) || !(e.horizon > e.start_time) || e.paths < 100 || !(e.sigma > 0.0) {
                return bad("ensemble needs dt > 0, horizon > start_time, paths >= 100 and sigma > 0".into());
            }
        }
        for v in &self.verifiers {
            if v.needs_pde() && (self.grid.is_none() || self.source.is_none()) {
                return bad(format!("verifier `{}` needs [grid] and [source]", v.name()));
            }
            if v.needs_ensemble() && self.ensemble.is_none() {
                return bad(format!("verifier `{}` needs [ensemble]", v.name()));
            }
            if matches!(v, VerifierSpec::DeGiorgi { .. } | VerifierSpec::GlobalMax { .. }) && self.norms.len() != 3 {
                return bad(format!("verifier `{}` needs three [[norms]] entries", v.name()));
            }
            if matches!(v, VerifierSpec::Stability { .. } | VerifierSpec::GlobalMax { .. })
                && self.mollification.as_ref().is_none_or(|m| m.levels.len() < 2)
            {
                return bad(format!("verifier `{}` needs at least two mollification levels", v.name()));
            }
            let positive = match v {
                VerifierSpec::Variance { k } | VerifierSpec::Moments { k } => *k > 0.0,
                VerifierSpec::DensityKs { alpha } => *alpha > 0.0 && *alpha < 1.0,
                VerifierSpec::GlobalMax { max_spread, refinement_tol } => *max_spread >= 1.0 && *refinement_tol > 0.0,
                VerifierSpec::FeynmanKac { dt, paths, .. } | VerifierSpec::Khasminskii { dt, paths, .. } => *dt > 0.0 && *paths >= 100,
                VerifierSpec::Krylov { dt, paths, deltas, starts, .. } => *dt > 0.0 && *paths >= 100 && !deltas.is_empty() && *starts >= 1,
                VerifierSpec::Jacobian { dt, paths, width, .. } => *dt > 0.0 && *paths >= 100 && *width > 0.0,
                VerifierSpec::Markov { seeds, .. } => *seeds >= 1,
                _ => true,
            };
            if !positive {
                return bad(format!("verifier `{}` has a non-positive tolerance or size", v.name()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
version = 1
name = "t"
seed = 3

[drift]
kind = "zero"
dim = 2

[ensemble]
start = [0.0, 0.0]
horizon = 1.0
dt = 0.01
paths = 1000

[[verifiers]]
kind = "variance"
"#;

    #[test]
    fn round_trip_is_lossless() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.ensemble.as_ref().unwrap().sigma, std::f64::consts::SQRT_2);
        let back = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(c, back);
        assert_eq!(c.hash().unwrap(), back.hash().unwrap());
    }

    #[test]
    fn unknown_keys_and_versions_rejected() {
        let extra = MINIMAL.replace("seed = 3", "seed = 3\ncolour = \"red\"");
        assert!(ExperimentConfig::from_toml(&extra).is_err());
        let v2 = MINIMAL.replace("version = 1", "version = 2");
        assert!(ExperimentConfig::from_toml(&v2).is_err());
        let bad_verifier = MINIMAL.replace("kind = \"variance\"", "kind = \"variance\"\nslack = 1.0");
        assert!(ExperimentConfig::from_toml(&bad_verifier).is_err());
    }

    #[test]
    fn missing_stage_inputs_rejected() {
        let pde = MINIMAL.replace("kind = \"variance\"", "kind = \"max_principle\"");
        assert!(matches!(ExperimentConfig::from_toml(&pde), Err(Error::Config(_))));
        let neg = MINIMAL.replace("kind = \"variance\"", "kind = \"variance\"\nk = -1.0");
        assert!(ExperimentConfig::from_toml(&neg).is_err());
    }
}
