//! Simulation scenarios: bundled presets mirroring the reference study
//! designs, or user-supplied JSON files with the same schema.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use richness::montecarlo::{Generator, PopulationSpec};

use crate::CliError;

/// A full simulation design: the synthetic population plus sampling plan.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// True number of species in the synthetic population.
    pub t: u64,
    /// Abundance-weight generator for the population.
    pub generator: Generator,
    /// Master seed; population and replicate streams derive from it.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Sample sizes to evaluate (one summary row per entry).
    #[serde(default = "default_grid")]
    pub n: Vec<u64>,
    /// Monte Carlo replicates per sample size.
    #[serde(default = "default_replicates")]
    pub replicates: u32,
    /// Bootstrap resamples per interval (confidence runs only).
    #[serde(default = "default_replicates")]
    pub bootstrap: u32,
    /// Nominal confidence level (confidence runs only).
    #[serde(default = "default_level")]
    pub level: f64,
}

fn default_seed() -> u64 {
    9
}

fn default_grid() -> Vec<u64> {
    vec![500, 1000, 2000]
}

fn default_replicates() -> u32 {
    1000
}

fn default_level() -> f64 {
    0.95
}

const BUNDLED: &[&str] = &[
    "table1",
    "table2",
    "table3",
    "table4",
    "table7-pop1",
    "table7-pop2",
    "table7-pop3",
];

impl Scenario {
    fn bundled(name: &str) -> Option<Scenario> {
        let preset = |generator| Scenario {
            t: 1000,
            generator,
            seed: default_seed(),
            n: default_grid(),
            replicates: default_replicates(),
            bootstrap: default_replicates(),
            level: default_level(),
        };
        let ci_preset = |generator| Scenario {
            n: vec![400],
            replicates: 100,
            ..preset(generator)
        };
        match name {
            "table1" => Some(preset(Generator::NormalNormalized {
                mu: 1.0,
                sigma: 0.095,
            })),
            "table2" => Some(preset(Generator::Uniform01)),
            "table3" => Some(preset(Generator::Exponential1)),
            "table4" => Some(preset(Generator::Gamma { shape: 0.11 })),
            "table7-pop1" => Some(ci_preset(Generator::NormalNormalized {
                mu: 1.0,
                sigma: 0.095,
            })),
            "table7-pop2" => Some(ci_preset(Generator::Uniform01)),
            "table7-pop3" => Some(ci_preset(Generator::Exponential1)),
            _ => None,
        }
    }

    /// Resolve a scenario argument: a bundled preset name, or a path to a
    /// JSON file with the scenario schema. Returns a display label too.
    pub fn resolve(arg: &str) -> Result<(String, Scenario), CliError> {
        if let Some(scenario) = Scenario::bundled(arg) {
            return Ok((arg.to_string(), scenario));
        }
        let path = Path::new(arg);
        if path.is_file() {
            let raw = fs::read_to_string(path).map_err(|err| {
                CliError::Input(format!("cannot read scenario {}: {err}", path.display()))
            })?;
            let scenario: Scenario = serde_json::from_str(&raw).map_err(|err| {
                CliError::Input(format!("invalid scenario {}: {err}", path.display()))
            })?;
            let label = path
                .file_stem()
                .map(|stem| stem.to_string_lossy().into_owned())
                .unwrap_or_else(|| arg.to_string());
            return Ok((label, scenario));
        }
        Err(CliError::Input(format!(
            "unknown scenario {arg:?}: expected a JSON file or one of {}",
            BUNDLED.join(", ")
        )))
    }

    /// The population specification implied by this scenario.
    pub fn population(&self) -> PopulationSpec {
        PopulationSpec {
            t: self.t,
            generator: self.generator,
            seed: self.seed,
        }
    }

    /// Reject designs the simulation engine cannot run.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.t < 1 {
            return Err(CliError::Input("scenario needs t >= 1".into()));
        }
        if self.n.is_empty() {
            return Err(CliError::Input(
                "scenario needs at least one sample size".into(),
            ));
        }
        if let Some(&bad) = self.n.iter().find(|&&n| n < 2) {
            return Err(CliError::Input(format!(
                "sample size {bad} is too small: need n >= 2"
            )));
        }
        if self.replicates < 1 {
            return Err(CliError::Input("scenario needs replicates >= 1".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(CliError::Input(format!(
                "confidence level must lie strictly between 0 and 1, got {}",
                self.level
            )));
        }
        if self.bootstrap < 100 {
            return Err(CliError::Input(format!(
                "bootstrap resamples must be at least 100, got {}",
                self.bootstrap
            )));
        }
        Ok(())
    }
}
