//! Tab-separated plot data derived from the report artifacts of a run.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::degiorgi::KappaCertificate;
use crate::error::{Error, Result};
use crate::pde::StabilityReport;
use crate::sde::krylov::KrylovReport;

use super::manifest::RunManifest;

fn load<T: serde::de::DeserializeOwned>(dir: &Path, rel: &str) -> Result<T> {
    let path = dir.join(rel);
    let bytes = std::fs::read(&path).map_err(|e| Error::Format {
        path: path.clone(),
        reason: format!("missing upstream artifact: {e}"),
    })?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Format {
        path,
        reason: e.to_string(),
    })
}

/// Write one TSV file per available figure into `<output>/plots` and return their paths.
pub fn emit_plots(manifest: &RunManifest, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let dir = out_dir.join("plots");
    std::fs::create_dir_all(&dir)?;
    let mut written = Vec::new();
    let mut emit = |name: &str, text: String| -> Result<()> {
        let p = dir.join(name);
        std::fs::write(&p, text)?;
        written.push(p);
        Ok(())
    };
    if let Some(a) = manifest.artifact("degiorgi") {
        let c: KappaCertificate = load(out_dir, &a.path)?;
        let mut s = String::from("n\tt_n\tlambda_n\tkappa_n\tell_sum\ta_n\n");
        for st in &c.report.states {
            let ell: f64 = st.ell.iter().sum();
            writeln!(s, "{}\t{}\t{}\t{}\t{}\t{}", st.n, st.t_n, st.lambda_n, st.kappa_n, ell, st.a_n).expect("string write");
        }
        emit("degiorgi_ladder.tsv", s)?;
    }
    if let Some(a) = manifest.artifact("krylov") {
        let r: KrylovReport = load(out_dir, &a.path)?;
        let mut s = String::from("start\tdelta\testimate\tse\tenvelope_fit\n");
        for (i, row) in r.estimates.iter().enumerate() {
            for (e, d) in row.iter().zip(&r.deltas) {
                writeln!(s, "{i}\t{d}\t{}\t{}\t{}", e.mean, e.se, r.constant * d.powf(r.theta)).expect("string write");
            }
        }
        emit("krylov_fit.tsv", s)?;
    }
    if let Some(a) = manifest.artifact("stability") {
        let r: StabilityReport = load(out_dir, &a.path)?;
        let mut s = String::from("pair\tepsilon_coarse\tepsilon_fine\tdistance\n");
        for (i, d) in r.consecutive.iter().enumerate() {
            writeln!(s, "{i}\t{}\t{}\t{d}", r.levels[i], r.levels[i + 1]).expect("string write");
        }
        emit("stability_distances.tsv", s)?;
    }
    if let Some(a) = manifest.artifact("density") {
        let v: Value = load(out_dir, &a.path)?;
        let col = |k: &str| -> Vec<f64> { v[k].as_array().map(|a| a.iter().filter_map(Value::as_f64).collect()).unwrap_or_default() };
        let (x, k, e) = (col("x"), col("kde"), col("exact"));
        let mut s = String::from("x\tkde\texact\n");
        for ((x, k), e) in x.iter().zip(&k).zip(&e) {
            writeln!(s, "{x}\t{k}\t{e}").expect("string write");
        }
        emit("density_slice.tsv", s)?;
    }
    if written.is_empty() {
        return Err(Error::Format {
            path: out_dir.to_path_buf(),
            reason: "missing upstream artifact: the run produced no plot sources".into(),
        });
    }
    Ok(written)
}
