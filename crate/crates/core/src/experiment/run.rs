//! Staged pipeline: norms → drift → PDE → De Giorgi → SDE → verifiers.
//!
//! Each stage writes into the output directory and records its artifacts.
//! Stochastic stages derive their seeds from the master seed and the verifier
//! position, so identical configurations reproduce identical artifact bytes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde_json::json;

use crate::degiorgi::{self, DeGiorgiConfig, KappaCertificate};
use crate::drift::external::load_external;
use crate::drift::DriftField;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, SpaceTimeField};
use crate::norms::localized::localized_norm_default;
use crate::norms::NormSpec;
use crate::pde::{compare_levels, solve, Direction, PdeProblem, SolutionBundle};
use crate::sde::density::{kde, ks_normal_marginals, marginal_samples, silverman_bandwidth};
use crate::sde::engine::{simulate, EnsembleConfig, TrajectoryEnsemble};
use crate::sde::feynman_kac::{feynman_kac_check, fit_disc_constant, standard_panel, FkConfig};
use crate::sde::jacobian::{jacobian_semigroup, JacobianConfig};
use crate::sde::khasminskii::khasminskii_verify;
use crate::sde::krylov::{krylov_verify, KrylovConfig};
use crate::sde::markov::markov_check;
use crate::sde::martingale::{martingale_defect, weak_order};
use crate::sde::stats::Estimate;
use crate::sde::weak_conv::{weak_convergence_scan, ScanConfig};

use super::config::{DriftSpec, EnsembleSpec, ExperimentConfig, VerifierSpec};
use super::manifest::{sha256_file, ArtifactRecord, RunManifest, StageRecord, StageStatus, VerifierOutcome};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "SDLAB_WORKERS";

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    base_dir: PathBuf,
    out: PathBuf,
    base: Option<DriftField>,
    drift_grid: Option<GridSpec>,
    mollified: Mutex<BTreeMap<u64, DriftField>>,
    source: Option<SpaceTimeField>,
    /// Forward solutions per ladder level (or one for a regular drift).
    solutions: Vec<(f64, SolutionBundle)>,
    certificate: Option<KappaCertificate>,
    ensemble: Option<TrajectoryEnsemble>,
    artifacts: Vec<ArtifactRecord>,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

impl Context<'_> {
    fn record(&mut self, rel: &str, kind: &str) -> Result<()> {
        let hash = sha256_file(&self.out.join(rel))?;
        self.artifacts.push(ArtifactRecord {
            path: rel.to_string(),
            kind: kind.to_string(),
            sha256: hash,
        });
        Ok(())
    }

    fn write_json(&mut self, rel: &str, kind: &str, value: &impl serde::Serialize) -> Result<()> {
        std::fs::write(self.out.join(rel), serde_json::to_vec_pretty(value)?)?;
        self.record(rel, kind)
    }

    fn base(&self) -> Result<&DriftField> {
        self.base.as_ref().ok_or_else(|| Error::Config("drift stage did not run".into()))
    }

    fn grid(&self) -> Result<GridSpec> {
        self.cfg.grid.ok_or_else(|| Error::Config("scenario has no [grid]".into()))
    }

    fn source(&self) -> Result<&SpaceTimeField> {
        self.source.as_ref().ok_or_else(|| Error::Config("scenario has no [source]".into()))
    }

    /// Drift at level `eps`; `None` means the base field when regular, else the finest ladder level.
    fn drift(&self, eps: Option<f64>) -> Result<DriftField> {
        let base = self.base()?;
        let eps = match eps {
            Some(e) => e,
            None if base.is_regular() => return Ok(base.clone()),
            None => *self
                .cfg
                .mollification
                .as_ref()
                .and_then(|m| m.levels.last())
                .ok_or(Error::UnregularizedDrift)?,
        };
        let g = self.drift_grid.ok_or_else(|| Error::Config("mollification needs [mollification] and [grid]".into()))?;
        let key = eps.to_bits();
        if let Some(b) = self.mollified.lock().expect("drift cache").get(&key) {
            return Ok(b.clone());
        }
        let b = base.mollify(&g, eps)?;
        self.mollified.lock().expect("drift cache").insert(key, b.clone());
        Ok(b)
    }

    fn levels(&self) -> Vec<Option<f64>> {
        match &self.cfg.mollification {
            Some(m) => m.levels.iter().map(|&e| Some(e)).collect(),
            None => vec![None],
        }
    }

    fn seed(&self, index: usize) -> u64 {
        self.cfg.seed.wrapping_add(1000 * (index as u64 + 1))
    }

    fn ensemble_config(&self, spec: &EnsembleSpec, seed: u64) -> EnsembleConfig {
        let mut c = EnsembleConfig::new(spec.start.clone(), spec.horizon, spec.dt, spec.paths, seed);
        c.start_time = spec.start_time;
        c.sigma = spec.sigma;
        c.record_every = spec.record_every;
        c
    }
}

/// Run a configuration, writing everything under `out` (relative external
/// paths resolve against `base_dir`). The manifest is written even when a
/// verifier fails; a failing stage returns [`Error::Stage`].
pub fn run(cfg: &ExperimentConfig, base_dir: &Path, out: &Path) -> Result<RunManifest> {
    cfg.validate()?;
    let workers = std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(|| run_inner(cfg, base_dir, out))
}

type Stage = fn(&mut Context<'_>) -> Result<bool>;

fn run_inner(cfg: &ExperimentConfig, base_dir: &Path, out: &Path) -> Result<RunManifest> {
    std::fs::create_dir_all(out)?;
    let started = now();
    let mut ctx = Context {
        cfg,
        base_dir: base_dir.to_path_buf(),
        out: out.to_path_buf(),
        base: None,
        drift_grid: None,
        mollified: Mutex::new(BTreeMap::new()),
        source: None,
        solutions: Vec::new(),
        certificate: None,
        ensemble: None,
        artifacts: Vec::new(),
    };
    std::fs::write(out.join("config.toml"), cfg.to_toml()?)?;
    ctx.record("config.toml", "config")?;
    let stages: [(&str, Stage); 5] = [
        ("norms", stage_norms),
        ("drift", stage_drift),
        ("pde", stage_pde),
        ("degiorgi", stage_degiorgi),
        ("sde", stage_sde),
    ];
    let mut records = Vec::new();
    let manifest = |ctx: &Context<'_>, records: Vec<StageRecord>, verifiers: Vec<VerifierOutcome>, pass: bool| -> Result<RunManifest> {
        let m = RunManifest {
            scenario: cfg.name.clone(),
            config_hash: cfg.hash()?,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: started,
            finished_unix: now(),
            output_dir: out.to_path_buf(),
            stages: records,
            artifacts: ctx.artifacts.clone(),
            verifiers,
            pass,
        };
        m.write(out)?;
        Ok(m)
    };
    for (name, stage) in stages {
        let t = Instant::now();
        let before = ctx.artifacts.len();
        match stage(&mut ctx) {
            Ok(ran) => records.push(StageRecord {
                name: name.into(),
                status: if ran { StageStatus::Done } else { StageStatus::Skipped },
                seconds: t.elapsed().as_secs_f64(),
            }),
            Err(e) => {
                records.push(StageRecord {
                    name: name.into(),
                    status: StageStatus::Failed,
                    seconds: t.elapsed().as_secs_f64(),
                });
                let artifacts = ctx.artifacts[before..].iter().map(|a| out.join(&a.path)).collect();
                manifest(&ctx, records, Vec::new(), false)?;
                return Err(Error::Stage {
                    stage: name.into(),
                    artifacts,
                    source: Box::new(e),
                });
            }
        }
        log::info!("stage {name} finished in {:.2}s", t.elapsed().as_secs_f64());
    }
    let t = Instant::now();
    let mut outcomes = Vec::new();
    for (i, v) in cfg.verifiers.iter().enumerate() {
        let outcome = match run_verifier(&mut ctx, i, v) {
            Ok(o) => o,
            Err(e) => VerifierOutcome {
                name: v.name().into(),
                pass: false,
                summary: json!({ "error": e.to_string() }),
            },
        };
        log::info!("verifier {} -> {}", outcome.name, if outcome.pass { "pass" } else { "FAIL" });
        outcomes.push(outcome);
    }
    let lines: Vec<String> = outcomes.iter().map(serde_json::to_string).collect::<std::result::Result<_, _>>()?;
    std::fs::write(out.join("reports.jsonl"), lines.join("\n") + "\n")?;
    ctx.record("reports.jsonl", "reports")?;
    records.push(StageRecord {
        name: "verifiers".into(),
        status: StageStatus::Done,
        seconds: t.elapsed().as_secs_f64(),
    });
    let pass = outcomes.iter().all(|o| o.pass);
    manifest(&ctx, records, outcomes, pass)
}

fn stage_norms(ctx: &mut Context<'_>) -> Result<bool> {
    let (Some(grid), Some(src)) = (ctx.cfg.grid, ctx.cfg.source.as_ref()) else {
        return Ok(false);
    };
    let f = src.field(grid);
    if f.min_value() < 0.0 {
        return Err(Error::Config("sources must be nonnegative".into()));
    }
    let norms: Vec<serde_json::Value> = ctx
        .cfg
        .norms
        .iter()
        .map(|s| Ok(json!({ "spec": s, "localized_norm": localized_norm_default(&f, s)? })))
        .collect::<Result<_>>()?;
    ctx.source = Some(f);
    ctx.write_json("norms.json", "norms", &norms)?;
    Ok(true)
}

fn stage_drift(ctx: &mut Context<'_>) -> Result<bool> {
    let cfg = ctx.cfg;
    let base = match &cfg.drift {
        DriftSpec::TaylorGreen { ingest: true } => {
            let g = ctx.grid()?.with_time(0.0, 1.0, 1)?;
            let tg = DriftField::taylor_green();
            let field = SpaceTimeField::from_vector_fn(g, 2, |t, x, o| tg.eval(t, x, o));
            std::fs::create_dir_all(ctx.out.join("drift"))?;
            field.write_sdlf(&ctx.out.join("drift/taylor_green.sdlf"))?;
            ctx.record("drift/taylor_green.sdlf", "drift_field")?;
            load_external(&ctx.out.join("drift/taylor_green.sdlf"), &g, None)?.0
        }
        spec => spec.build(cfg.grid.as_ref(), &ctx.base_dir)?,
    };
    if let (Some(m), Some(g)) = (&cfg.mollification, cfg.grid) {
        ctx.drift_grid = Some(g.with_points(m.drift_points)?.with_time(g.time_start, g.time_end, g.time_steps)?);
    }
    ctx.base = Some(base);
    let levels: Vec<f64> = ctx.levels().into_iter().flatten().collect();
    // mollify up front so later stages share the fields
    let fields: Vec<(f64, DriftField)> = levels.par_iter().map(|&e| Ok((e, ctx.drift(Some(e))?))).collect::<Result<_>>()?;
    let b = ctx.base()?;
    let info = json!({
        "provenance": b.provenance(),
        "dimension": b.dim(),
        "regular": b.is_regular(),
        "levels": fields.iter().map(|(e, f)| json!({ "epsilon": e, "regular": f.is_regular() })).collect::<Vec<_>>(),
    });
    ctx.write_json("drift.json", "drift", &info)?;
    Ok(true)
}

fn stage_pde(ctx: &mut Context<'_>) -> Result<bool> {
    let needs = ctx.cfg.verifiers.iter().any(|v| {
        matches!(
            v,
            VerifierSpec::MaxPrinciple | VerifierSpec::Stability { .. } | VerifierSpec::GlobalMax { .. } | VerifierSpec::DeGiorgi { .. }
        )
    });
    if !needs {
        return Ok(false);
    }
    let levels = ctx.levels();
    let source = ctx.source()?.clone();
    let solver = ctx.cfg.solver;
    let sols: Vec<(f64, SolutionBundle)> = levels
        .par_iter()
        .map(|&e| {
            let b = ctx.drift(e)?;
            let p = PdeProblem::new(b, source.clone(), Direction::Forward)?;
            Ok((e.unwrap_or(0.0), solve(&p, &solver)?))
        })
        .collect::<Result<_>>()?;
    std::fs::create_dir_all(ctx.out.join("pde"))?;
    for (e, s) in &sols {
        let rel = format!("pde/u_eps{e}.sdlf");
        s.u.write_sdlf(&ctx.out.join(&rel))?;
        ctx.record(&rel, "pde_solution")?;
    }
    ctx.solutions = sols;
    Ok(true)
}

fn degiorgi_config(ctx: &Context<'_>, center_time: f64, radius: f64) -> Result<DeGiorgiConfig> {
    let n = &ctx.cfg.norms;
    let d = ctx.grid()?.dim();
    Ok(DeGiorgiConfig::new([n[0], n[1], n[2]], center_time, vec![0.0; d]).with_radius(radius))
}

fn solution_at<'c>(ctx: &'c Context<'_>, eps: Option<f64>) -> Result<&'c SolutionBundle> {
    let target = eps.or_else(|| ctx.cfg.mollification.as_ref().and_then(|m| m.levels.last().copied())).unwrap_or(0.0);
    ctx.solutions
        .iter()
        .find(|(e, _)| (e - target).abs() <= 1e-12 * target.max(1.0))
        .map(|(_, s)| s)
        .ok_or_else(|| Error::Config(format!("no PDE solution at level {target}")))
}

fn stage_degiorgi(ctx: &mut Context<'_>) -> Result<bool> {
    let Some(VerifierSpec::DeGiorgi { epsilon, center_time, radius }) =
        ctx.cfg.verifiers.iter().find(|v| matches!(v, VerifierSpec::DeGiorgi { .. })).cloned()
    else {
        return Ok(false);
    };
    let dg = degiorgi_config(ctx, center_time, radius)?;
    let sol = solution_at(ctx, epsilon)?;
    let f_norm = degiorgi::source_norm(ctx.source()?, &dg)?;
    let cert = degiorgi::threshold_kappa(sol, &dg, f_norm)?;
    ctx.write_json("degiorgi.json", "degiorgi", &cert)?;
    ctx.certificate = Some(cert);
    Ok(true)
}

fn stage_sde(ctx: &mut Context<'_>) -> Result<bool> {
    let Some(spec) = ctx.cfg.ensemble.clone() else {
        return Ok(false);
    };
    let b = ctx.drift(spec.epsilon)?;
    let ens = simulate(&ctx.ensemble_config(&spec, ctx.cfg.seed), &b)?;
    ens.write_sdle(&ctx.out.join("ensemble.sdle"))?;
    ctx.record("ensemble.sdle", "ensemble")?;
    ctx.ensemble = Some(ens);
    Ok(true)
}

/// Exact law of `X_T` per coordinate for drifts with Gaussian transition laws.
fn exact_law(spec: &DriftSpec, e: &EnsembleSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    let tau = e.horizon - e.start_time;
    Ok(match spec {
        DriftSpec::Zero { .. } => (e.start.clone(), vec![2.0 * tau; e.start.len()]),
        DriftSpec::Constant { v } => (e.start.iter().zip(v).map(|(x, v)| x + v * tau).collect(), vec![2.0 * tau; v.len()]),
        DriftSpec::OrnsteinUhlenbeck { a, .. } => (
            e.start.iter().map(|x| x * (-a * tau).exp()).collect(),
            vec![(1.0 - (-2.0 * a * tau).exp()) / a; e.start.len()],
        ),
        _ => return Err(Error::Config("no closed-form law for this drift".into())),
    })
}

fn verifier_seed(ctx: &Context<'_>, i: usize) -> u64 {
    ctx.seed(i)
}

fn gaussian_bump(grid: GridSpec, width: f64) -> SpaceTimeField {
    SpaceTimeField::from_fn(grid, |_, x| (-x.iter().map(|v| v * v).sum::<f64>() / (width * width)).exp())
}

fn krylov_starts(d: usize, n: usize, radius: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|j| {
            let mut x = vec![0.0; d];
            if j > 0 && n > 1 {
                let r = radius * j as f64 / (n - 1) as f64;
                x[j % d] = if j % 2 == 0 { r } else { -r };
            }
            x
        })
        .collect()
}

fn run_verifier(ctx: &mut Context<'_>, i: usize, v: &VerifierSpec) -> Result<VerifierOutcome> {
    let name = v.name().to_string();
    let seed = verifier_seed(ctx, i);
    let (pass, summary) = match v {
        VerifierSpec::Variance { k } => {
            let ens = ctx.ensemble.as_ref().ok_or_else(|| Error::Config("no ensemble".into()))?;
            let spec = ctx.cfg.ensemble.as_ref().expect("validated");
            let target = 2.0 * (spec.horizon - spec.start_time);
            let last = ens.record_steps.len() - 1;
            let mut per_axis = Vec::new();
            let mut ok = true;
            for a in 0..ens.dim() {
                let inc: Vec<f64> = ens.marginal(last).iter().map(|x| x[a] - spec.start[a]).collect();
                let mean = inc.iter().sum::<f64>() / inc.len() as f64;
                let sq: Vec<f64> = inc.iter().map(|v| (v - mean).powi(2)).collect();
                let est = Estimate::from_samples(&sq);
                let pass = est.within(target, *k, 0.0);
                ok &= pass;
                per_axis.push(json!({ "axis": a, "variance": est, "target": target, "pass": pass }));
            }
            (ok, json!({ "axes": per_axis }))
        }
        VerifierSpec::DensityKs { alpha } => {
            let ens = ctx.ensemble.as_ref().ok_or_else(|| Error::Config("no ensemble".into()))?;
            let spec = ctx.cfg.ensemble.as_ref().expect("validated");
            let (means, vars) = exact_law(&ctx.cfg.drift, spec)?;
            let ks = ks_normal_marginals(ens, spec.horizon, &means, &vars, *alpha)?;
            let xs = marginal_samples(ens, spec.horizon, 0)?;
            let sd = vars[0].sqrt();
            let points: Vec<f64> = (0..=80).map(|j| means[0] - 4.0 * sd + j as f64 * 0.1 * sd).collect();
            let est = kde(&xs, &points, silverman_bandwidth(&xs));
            let exact: Vec<f64> = points
                .iter()
                .map(|y| (-(y - means[0]).powi(2) / (2.0 * vars[0])).exp() / (2.0 * std::f64::consts::PI * vars[0]).sqrt())
                .collect();
            let slice = json!({ "x": points, "kde": est, "exact": exact });
            ctx.write_json("density.json", "density", &slice)?;
            (ks.iter().all(|k| k.pass), json!({ "ks": ks }))
        }
        VerifierSpec::Moments { k } => {
            let ens = ctx.ensemble.as_ref().ok_or_else(|| Error::Config("no ensemble".into()))?;
            let spec = ctx.cfg.ensemble.as_ref().expect("validated");
            let DriftSpec::OrnsteinUhlenbeck { a, .. } = ctx.cfg.drift else {
                return Err(Error::Config("moment checks need the Ornstein–Uhlenbeck drift".into()));
            };
            let (means, vars) = exact_law(&ctx.cfg.drift, spec)?;
            let (steps, dt) = ens.config.steps();
            // the Euler chain has mean x(1 − a dt)^K and variance σ²dt Σ_j (1 − a dt)^{2j}
            let r = 1.0 - a * dt;
            let chain_var = spec.sigma * spec.sigma * dt * (0..steps).map(|j| r.powi(2 * j as i32)).sum::<f64>();
            let last = ens.record_steps.len() - 1;
            let mut ok = true;
            let mut axes = Vec::new();
            for ax in 0..ens.dim() {
                let xs: Vec<f64> = ens.marginal(last).iter().map(|x| x[ax]).collect();
                let mean = Estimate::from_samples(&xs);
                let m = mean.mean;
                let var = Estimate::from_samples(&xs.iter().map(|x| (x - m).powi(2)).collect::<Vec<_>>());
                let chain_mean = spec.start[ax] * r.powi(steps as i32);
                let mean_allow = (chain_mean - means[ax]).abs();
                let var_allow = (chain_var - vars[ax]).abs();
                let pm = mean.within(means[ax], *k, mean_allow);
                let pv = var.within(vars[ax], *k, var_allow);
                ok &= pm && pv;
                axes.push(json!({
                    "axis": ax, "mean": mean, "mean_target": means[ax], "mean_allowance": mean_allow,
                    "variance": var, "variance_target": vars[ax], "variance_allowance": var_allow,
                    "pass": pm && pv,
                }));
            }
            (ok, json!({ "axes": axes }))
        }
        VerifierSpec::MaxPrinciple => {
            let src_min = ctx.source()?.min_value();
            let per: Vec<serde_json::Value> = ctx
                .solutions
                .iter()
                .map(|(e, s)| {
                    let violations = s.u.values().iter().filter(|&&v| v < 0.0).count();
                    json!({ "epsilon": e, "min": s.u.min_value(), "violations": violations })
                })
                .collect();
            let total: u64 = per.iter().map(|p| p["violations"].as_u64().unwrap_or(0)).sum();
            (src_min >= 0.0 && total == 0, json!({ "source_min": src_min, "levels": per, "violations": total }))
        }
        VerifierSpec::Stability { region_radius } => {
            let levels: Vec<f64> = ctx.solutions.iter().map(|(e, _)| *e).collect();
            let sols: Vec<SolutionBundle> = ctx.solutions.iter().map(|(_, s)| s.clone()).collect();
            let spec = ctx.cfg.norms.get(2).copied().unwrap_or(NormSpec::lebesgue(4.0, 4.0));
            let r = compare_levels(&levels, &sols, ctx.source()?, *region_radius, &spec)?;
            ctx.write_json("stability.json", "stability", &r)?;
            let bounded = r.uniform_bound.is_finite();
            (r.strictly_decreasing && bounded, serde_json::to_value(&r)?)
        }
        VerifierSpec::GlobalMax { max_spread, refinement_tol } => {
            let spec = ctx.cfg.norms[2];
            let f = ctx.source()?.clone();
            let f_norm = localized_norm_default(&f, &spec)?;
            let coarse: Vec<f64> = ctx.solutions.iter().map(|(_, s)| s.sup_norm / f_norm).collect();
            let g = ctx.grid()?;
            let fine_grid = g.with_points(2 * g.n())?;
            let f2 = ctx.cfg.source.as_ref().expect("validated").field(fine_grid);
            let f2_norm = localized_norm_default(&f2, &spec)?;
            let solver = ctx.cfg.solver;
            let fine: Vec<f64> = ctx
                .levels()
                .par_iter()
                .map(|&e| {
                    let p = PdeProblem::new(ctx.drift(e)?, f2.clone(), Direction::Forward)?;
                    Ok(solve(&p, &solver)?.sup_norm / f2_norm)
                })
                .collect::<Result<_>>()?;
            let max = coarse.iter().copied().fold(0.0, f64::max);
            let min = coarse.iter().copied().fold(f64::INFINITY, f64::min);
            let spread = max / min;
            let change = coarse.iter().zip(&fine).map(|(a, b)| (a - b).abs() / b.abs()).fold(0.0, f64::max);
            (
                spread <= *max_spread && change <= *refinement_tol,
                json!({ "constants": coarse, "refined_constants": fine, "spread": spread, "refinement_change": change }),
            )
        }
        VerifierSpec::FeynmanKac { epsilon, panel_radius, dt, paths } => {
            let b = ctx.drift(*epsilon)?;
            let g = ctx.grid()?;
            let src = ctx.cfg.source.clone().expect("validated");
            let solver = ctx.cfg.solver;
            let solve_on = |f: &SpaceTimeField| -> Result<SolutionBundle> {
                solve(&PdeProblem::new(b.clone(), f.clone(), Direction::Backward)?, &solver)
            };
            let f = src.field(g);
            let fine_grid = g.with_points(2 * g.n())?;
            let f_fine = src.field(fine_grid);
            let (coarse, fine) = rayon::join(|| solve_on(&f), || solve_on(&f_fine));
            let (coarse, fine) = (coarse?, fine?);
            std::fs::create_dir_all(ctx.out.join("pde"))?;
            for (tag, s) in [("coarse", &coarse), ("fine", &fine)] {
                let rel = format!("pde/backward_{tag}.sdlf");
                s.u.write_sdlf(&ctx.out.join(&rel))?;
                ctx.record(&rel, "pde_backward")?;
            }
            let panel = standard_panel(g.dim(), g.time_start, g.time_end, *panel_radius);
            let c_disc = fit_disc_constant(&coarse, &fine, &panel, *dt);
            let fk = FkConfig {
                panel: panel.clone(),
                dt: *dt,
                paths: *paths,
                seed,
            };
            let report = feynman_kac_check(&fine, &b, &f_fine, c_disc, &fk)?;
            // f ≡ 1: both sides equal T − s
            let ones = SpaceTimeField::from_fn(g, |_, _| 1.0);
            let unit = solve_on(&ones)?;
            let unit_report = feynman_kac_check(&unit, &b, &ones, 0.0, &FkConfig { paths: 100, ..fk })?;
            let unit_gap = unit_report
                .cells
                .iter()
                .map(|c| (c.pde - (g.time_end - c.s)).abs().max((c.mc.mean - (g.time_end - c.s)).abs()))
                .fold(0.0, f64::max);
            ctx.write_json("feynman_kac.json", "duality", &json!({ "report": report, "unit_gap": unit_gap }))?;
            (report.pass && unit_gap < 1e-9, json!({ "c_disc": c_disc, "worst_ratio": report.worst_ratio(), "unit_gap": unit_gap, "cells": report.cells.len() }))
        }
        VerifierSpec::DeGiorgi { .. } => {
            let cert = ctx.certificate.as_ref().ok_or_else(|| Error::Config("De Giorgi stage did not run".into()))?;
            let eps = cert.report.fit.map(|f| f.epsilon);
            let pass = cert.report.is_decreasing() && eps.is_some_and(|e| e > 0.0) && cert.sufficient_bound.is_some_and(|b| cert.kappa <= b);
            (pass, json!({ "kappa": cert.kappa, "a": cert.report.a(), "epsilon": eps, "sufficient_bound": cert.sufficient_bound }))
        }
        VerifierSpec::Krylov { epsilon, starts, panel_radius, deltas, bump_width, dt, paths } => {
            let b = ctx.drift(*epsilon)?;
            let g = ctx.grid()?;
            let f = gaussian_bump(g.with_time(0.0, 1.0, 1)?, *bump_width);
            let spec = ctx.cfg.norms.get(2).copied().unwrap_or(NormSpec::lebesgue(4.0, 4.0));
            let kc = KrylovConfig {
                starts: krylov_starts(g.dim(), *starts, *panel_radius),
                start_time: 0.0,
                deltas: deltas.clone(),
                dt: *dt,
                paths: *paths,
                seed,
                exit_radius: None,
            };
            let r = krylov_verify(&b, &f, &spec, &kc)?;
            ctx.write_json("krylov.json", "krylov", &r)?;
            (r.pass, json!({ "theta": r.theta, "theta_ci": r.theta_ci, "constant": r.constant, "uniform_ratio": r.uniform_ratio }))
        }
        VerifierSpec::Khasminskii { epsilon, lambdas, bump_width, dt, paths } => {
            let b = ctx.drift(*epsilon)?;
            let g = ctx.grid()?;
            let f = gaussian_bump(g.with_time(0.0, 1.0, 1)?, *bump_width);
            let mut ec = EnsembleConfig::new(vec![0.0; g.dim()], 1.0, *dt, 2 * paths, seed);
            ec.start_time = 0.0;
            let mut rows = Vec::new();
            let mut ok = true;
            for &l in lambdas {
                let r = khasminskii_verify(&b, &f, l, &ec)?;
                ok &= r.stable;
                rows.push(r);
            }
            // constant integrand: the moment is e^{λ c} exactly
            let ones = SpaceTimeField::from_fn(g.with_time(0.0, 1.0, 1)?, |_, _| 1.0);
            let mut small = ec.clone();
            small.paths = 200;
            let exact = khasminskii_verify(&b, &ones, 1.0, &small)?;
            let exact_gap = (exact.c_emp() - 1f64.exp()).abs();
            ok &= exact_gap < 1e-12;
            (ok, json!({ "moments": rows, "constant_case_gap": exact_gap }))
        }
        VerifierSpec::Jacobian { epsilon, end_time, width, dt, paths, box_extent } => {
            let b = ctx.drift(*epsilon)?;
            let d = b.dim();
            let jc = JacobianConfig {
                start_time: 0.0,
                end_time: *end_time,
                dt: *dt,
                paths: *paths,
                seed,
                center: vec![0.3; d],
                width: *width,
                box_extent: *box_extent,
            };
            let r = jacobian_semigroup(&b, &jc)?;
            let mut pass = r.pass;
            let mut extra = json!(null);
            if let DriftSpec::OrnsteinUhlenbeck { a, dim } = ctx.cfg.drift {
                let exact = (a * dim as f64 * end_time).exp();
                let rel = (r.determinant.mean - exact).abs() / exact;
                pass &= rel <= 1e-3;
                extra = json!({ "exact": exact, "relative_error": rel });
            }
            (pass, json!({ "report": r, "closed_form": extra }))
        }
        VerifierSpec::Martingale { epsilon, test, t0, t1, probes, weak_order_dts } => {
            let b = ctx.drift(*epsilon)?;
            let spec = ctx.cfg.ensemble.clone().ok_or_else(|| Error::Config("martingale checks need [ensemble]".into()))?;
            let ec = ctx.ensemble_config(&spec, seed);
            let mut ok = true;
            let mut rows = Vec::new();
            for p in probes {
                let r = martingale_defect(&b, &ec, test, *t0, *t1, p)?;
                ok &= r.pass;
                rows.push(json!({ "probe": p, "report": r }));
            }
            let order = if weak_order_dts.is_empty() {
                None
            } else {
                let w = weak_order(&b, &ec, test, *t0, *t1, weak_order_dts)?;
                ok &= w.pass;
                Some(w)
            };
            (ok, json!({ "probes": rows, "weak_order": order }))
        }
        VerifierSpec::Markov { epsilon, t0, observable, seeds } => {
            let b = ctx.drift(*epsilon)?;
            let spec = ctx.cfg.ensemble.clone().ok_or_else(|| Error::Config("restart checks need [ensemble]".into()))?;
            let mut ok = true;
            let mut rows = Vec::new();
            for s in 0..*seeds {
                let r = markov_check(&b, &ctx.ensemble_config(&spec, seed + s as u64), *t0, observable)?;
                ok &= r.pass;
                rows.push(r);
            }
            (ok, json!({ "runs": rows }))
        }
        VerifierSpec::WeakConvergence { observables, modulus_deltas, theta } => {
            let spec = ctx.cfg.ensemble.clone().ok_or_else(|| Error::Config("weak convergence needs [ensemble]".into()))?;
            let drifts: Vec<(f64, DriftField)> = ctx.levels().iter().map(|&e| Ok((e.unwrap_or(0.0), ctx.drift(e)?))).collect::<Result<_>>()?;
            let sc = ScanConfig {
                ensemble: ctx.ensemble_config(&spec, seed),
                observables: observables.clone(),
                modulus_deltas: modulus_deltas.clone(),
                theta: *theta,
            };
            let r = weak_convergence_scan(&drifts, &sc)?;
            (r.cauchy && r.modulus_spread <= 2.0, serde_json::to_value(&r)?)
        }
    };
    Ok(VerifierOutcome { name, pass, summary })
}
