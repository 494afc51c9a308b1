//! Scenarios shipped with the library.

use crate::error::{Error, Result};

use super::config::ExperimentConfig;

const BUILTIN: &[(&str, &str)] = &[
    ("brownian-baseline", include_str!("../../scenarios/brownian-baseline.toml")),
    ("brownian-wrong-diffusion", include_str!("../../scenarios/brownian-wrong-diffusion.toml")),
    ("ou-moments", include_str!("../../scenarios/ou-moments.toml")),
    ("radial-c0.5-sweep", include_str!("../../scenarios/radial-c0.5-sweep.toml")),
    ("taylor-green-jacobian", include_str!("../../scenarios/taylor-green-jacobian.toml")),
];

/// `(name, description)` of every built-in scenario.
pub fn list() -> Vec<(String, String)> {
    BUILTIN
        .iter()
        .map(|(n, t)| {
            let d = ExperimentConfig::from_toml(t).map(|c| c.description).unwrap_or_default();
            (n.to_string(), d)
        })
        .collect()
}

pub fn source(name: &str) -> Option<&'static str> {
    BUILTIN.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn load(name: &str) -> Result<ExperimentConfig> {
    let text = source(name).ok_or_else(|| Error::Config(format!("unknown scenario `{name}`")))?;
    ExperimentConfig::from_toml(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_parses_and_round_trips() {
        for (name, _) in list() {
            let c = load(&name).unwrap();
            assert_eq!(c.name, name);
            assert_eq!(ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap(), c);
        }
    }
}
