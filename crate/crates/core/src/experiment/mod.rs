//! Config-driven experiments: TOML scenarios, a staged runner writing
//! SDLF/SDLE/JSON artifacts with a hashed manifest, and TSV plot data.

pub mod config;
pub mod manifest;
pub mod plots;
pub mod run;
pub mod scenarios;

pub use config::{ExperimentConfig, VerifierSpec};
pub use manifest::RunManifest;
pub use plots::emit_plots;
pub use run::{run, WORKERS_ENV};
