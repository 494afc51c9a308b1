//! Command-line front end: run scenarios, emit plot data, list and validate configs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sdlab::experiment::{emit_plots, run, scenarios, ExperimentConfig, RunManifest, WORKERS_ENV};

#[derive(Parser)]
#[command(name = "sdlab", version, about = "SDE and parabolic PDE laboratory for singular drifts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario (built-in name or TOML path); exits nonzero when a verifier fails.
    Run {
        scenario: String,
        /// Output directory (overrides the config).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Worker threads (also read from the environment).
        #[arg(long, env = WORKERS_ENV)]
        workers: Option<usize>,
    },
    /// Write TSV plot data for a finished run (manifest file or output directory).
    EmitPlots { manifest: PathBuf },
    /// List built-in scenarios.
    ListScenarios,
    /// Parse and validate a config without running it.
    ValidateConfig { scenario: String },
}

fn load(scenario: &str) -> sdlab::Result<(ExperimentConfig, PathBuf)> {
    let path = Path::new(scenario);
    if path.is_file() {
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((ExperimentConfig::load(path)?, base))
    } else {
        Ok((scenarios::load(scenario)?, PathBuf::from(".")))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, output, workers } => (|| {
            if let Some(n) = workers {
                // the runner reads the worker count from the environment
                std::env::set_var(WORKERS_ENV, n.to_string());
            }
            let (cfg, base) = load(&scenario)?;
            let out = output.unwrap_or_else(|| cfg.output_dir());
            let m = run(&cfg, &base, &out)?;
            for v in &m.verifiers {
                println!("{:<18} {}", v.name, if v.pass { "pass" } else { "FAIL" });
            }
            println!("manifest: {}", out.join(sdlab::experiment::manifest::MANIFEST_FILE).display());
            Ok(m.pass)
        })(),
        Command::EmitPlots { manifest } => (|| {
            let m = RunManifest::read(&manifest)?;
            let dir = if manifest.is_dir() { manifest.clone() } else { manifest.parent().map(Path::to_path_buf).unwrap_or_default() };
            for p in emit_plots(&m, &dir)? {
                println!("{}", p.display());
            }
            Ok(true)
        })(),
        Command::ListScenarios => {
            for (name, desc) in scenarios::list() {
                println!("{name:<26} {desc}");
            }
            Ok(true)
        }
        Command::ValidateConfig { scenario } => load(&scenario).map(|(c, _)| {
            println!("{}: ok ({} verifiers, hash {})", c.name, c.verifiers.len(), c.hash().unwrap_or_default());
            true
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::from(2)
        }
    }
}
