//! End-to-end runs of small configurations through the experiment pipeline
//! and the `sdlab` binary.

use std::path::Path;
use std::process::Command;

use sdlab::experiment::config::{ExperimentConfig, VerifierSpec};
use sdlab::experiment::manifest::{RunManifest, MANIFEST_FILE};
use sdlab::experiment::plots::emit_plots;
use sdlab::experiment::run::run;
use sdlab::experiment::scenarios;

/// The radial scenario shrunk to a few seconds: coarse grid, two levels, few paths.
fn small_radial() -> ExperimentConfig {
    let mut cfg = scenarios::load("radial-c0.5-sweep").unwrap();
    cfg.name = "radial-small".into();
    let g = cfg.grid.unwrap();
    cfg.grid = Some(g.with_points(16).unwrap());
    let m = cfg.mollification.as_mut().unwrap();
    m.levels = vec![0.4, 0.2];
    m.drift_points = 64;
    cfg.ensemble.as_mut().unwrap().paths = 500;
    for v in &mut cfg.verifiers {
        match v {
            VerifierSpec::FeynmanKac { epsilon, paths, dt, .. } => {
                *epsilon = Some(0.2);
                *paths = 300;
                *dt = 0.01;
            }
            VerifierSpec::DeGiorgi { epsilon, .. } => *epsilon = Some(0.2),
            _ => {}
        }
    }
    cfg
}

fn small_brownian() -> ExperimentConfig {
    let mut cfg = scenarios::load("brownian-baseline").unwrap();
    let e = cfg.ensemble.as_mut().unwrap();
    e.paths = 2000;
    e.dt = 0.01;
    cfg
}

#[test]
fn builtin_scenarios_validate() {
    let names = scenarios::list();
    assert!(names.len() >= 5);
    for (name, _) in names {
        let cfg = scenarios::load(&name).unwrap();
        cfg.validate().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap(), cfg);
    }
}

#[test]
fn radial_run_records_every_stage() {
    let dir = tempfile::tempdir().unwrap();
    let m = run(&small_radial(), Path::new("."), dir.path()).unwrap();
    assert_eq!(m.artifacts_of("pde_solution").count(), 2);
    for kind in ["config", "ensemble", "degiorgi", "stability"] {
        assert!(m.artifact(kind).is_some(), "missing {kind}");
    }
    for a in &m.artifacts {
        assert!(dir.path().join(&a.path).is_file(), "{}", a.path);
    }
    let names: Vec<&str> = m.verifiers.iter().map(|v| v.name.as_str()).collect();
    for name in ["max_principle", "stability", "global_max", "feynman_kac", "de_giorgi"] {
        assert!(names.contains(&name), "{name} did not report");
    }
    assert!(m.verifiers.iter().find(|v| v.name == "max_principle").unwrap().pass);
    let back = RunManifest::read(&dir.path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(back.artifact_hashes(), m.artifact_hashes());

    let plots = emit_plots(&m, dir.path()).unwrap();
    let ladder = plots.iter().find(|p| p.ends_with("degiorgi_ladder.tsv")).expect("ladder plot");
    let text = std::fs::read_to_string(ladder).unwrap();
    let t_n: Vec<f64> = text.lines().skip(1).map(|l| l.split('\t').nth(1).unwrap().parse().unwrap()).collect();
    assert!(t_n.len() >= 2);
    // the cylinders shrink monotonically onto the center time
    assert!(t_n.windows(2).all(|w| w[1] < w[0] && w[1] >= 1.0), "{t_n:?}");
}

#[test]
fn reruns_reproduce_artifact_bytes() {
    let cfg = small_brownian();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = run(&cfg, Path::new("."), a.path()).unwrap();
    let mb = run(&cfg, Path::new("."), b.path()).unwrap();
    assert!(!ma.artifacts.is_empty());
    assert_eq!(ma.artifact_hashes(), mb.artifact_hashes());
    assert_eq!(ma.config_hash, mb.config_hash);
}

#[test]
fn wrong_diffusion_fails_its_checks() {
    let mut cfg = scenarios::load("brownian-wrong-diffusion").unwrap();
    cfg.ensemble.as_mut().unwrap().dt = 0.01;
    let dir = tempfile::tempdir().unwrap();
    let m = run(&cfg, Path::new("."), dir.path()).unwrap();
    assert!(!m.pass);
    assert!(!m.verifiers.iter().find(|v| v.name == "variance").unwrap().pass);
}

#[test]
fn cli_verbs() {
    let sdlab = || {
        let mut c = Command::new(env!("CARGO_BIN_EXE_sdlab"));
        c.env("RUST_LOG", "warn");
        c
    };
    let out = sdlab().arg("list-scenarios").output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("radial-c0.5-sweep"));

    let ok = sdlab().args(["validate-config", "ou-moments"]).output().unwrap();
    assert!(ok.status.success());

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "version = 1\nname = \"x\"\nseed = 1\nbogus = 2\n").unwrap();
    let err = sdlab().arg("validate-config").arg(&bad).output().unwrap();
    assert_eq!(err.status.code(), Some(2));

    let cfg = dir.path().join("brownian.toml");
    std::fs::write(&cfg, small_brownian().to_toml().unwrap()).unwrap();
    let run_dir = dir.path().join("run");
    let ran = sdlab().arg("run").arg(&cfg).arg("-o").arg(&run_dir).env("SDLAB_WORKERS", "2").output().unwrap();
    assert_eq!(ran.status.code(), Some(0));
    assert!(run_dir.join(MANIFEST_FILE).is_file());
    let plots = sdlab().arg("emit-plots").arg(&run_dir).output().unwrap();
    assert!(plots.status.success());
}
