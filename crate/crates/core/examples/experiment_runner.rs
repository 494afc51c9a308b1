//! Run a built-in scenario through the staged runner and emit plot data.
//!
//! `cargo run --release --example experiment_runner -- ou-moments`

use sdlab::experiment::{emit_plots, run, scenarios};

fn main() -> sdlab::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "taylor-green-jacobian".into());
    let cfg = scenarios::load(&name)?;
    let out = std::env::temp_dir().join("sdlab-runs").join(&name);
    let m = run(&cfg, std::path::Path::new("."), &out)?;
    for v in &m.verifiers {
        println!("{:<18} {}", v.name, if v.pass { "pass" } else { "FAIL" });
    }
    for a in &m.artifacts {
        println!("{:<14} {} {}", a.kind, &a.sha256[..12], a.path);
    }
    match emit_plots(&m, &out) {
        Ok(files) => files.iter().for_each(|p| println!("plot data: {}", p.display())),
        Err(e) => println!("no plot data: {e}"),
    }
    Ok(())
}
