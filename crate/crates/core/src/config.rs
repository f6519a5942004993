//! Experiment configuration files.
//!
//! Configurations are TOML documents; comments are allowed and unknown keys
//! are rejected. Every field has a default, so an empty file is valid and
//! describes the full protocol: 30 dimensions, 40 particles, 51 trials and
//! an evaluation budget of 300 000 per trial.
//!
//! ```toml
//! trials = 11
//! master_seed = 7
//! population = 40
//! history_stride = 1
//! output_dir = "results"
//! jobs = 0                 # 0 = one worker per core
//!
//! [budget]
//! iterations = 1000        # or: evaluations = 300000
//!
//! [[algorithms]]
//! name = "pso"
//!
//! [[algorithms]]
//! name = "gcpso"
//! label = "gcpso-0.1"      # id used in outputs, defaults to name
//! epsilon = 0.1
//! inertia = { kind = "linear", start = 0.9, end = 0.4 }
//!
//! [[objectives]]
//! name = "rastrigin_shifted_rotated"
//! dimension = 10
//! transform_seed = 3
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::{BaseFunction, Objective};
use crate::optimizers::{Algorithm, InertiaSchedule, Neighborhood, OptimizerConfig, Perturbation};

/// Environment variable that replaces the default output directory.
pub const OUTPUT_DIR_ENV: &str = "GCPSO_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "results";

/// Trial budget, either in iterations or in objective evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Budget {
    Iterations(usize),
    /// Converted to `floor((evaluations - n) / n)` iterations, since the
    /// initial swarm costs `n` evaluations.
    Evaluations(u64),
}

impl Budget {
    pub fn iterations(self, population: usize) -> Result<usize> {
        let iters = match self {
            Budget::Iterations(k) => k,
            Budget::Evaluations(e) => {
                let n = population as u64;
                (e.saturating_sub(n) / n.max(1)) as usize
            }
        };
        if iters == 0 {
            return Err(Error::config("budget", format!("{self:?} leaves no iterations")));
        }
        Ok(iters)
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::Evaluations(300_000)
    }
}

/// One algorithm column of an experiment. Unset hyperparameters take the
/// library defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inertia: Option<InertiaSchedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neighborhood: Option<Neighborhood>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<Perturbation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_max_fraction: Option<f64>,
}

impl AlgorithmSpec {
    pub fn named(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    /// Identifier used in outputs and comparisons.
    pub fn id(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.name)
    }

    pub fn algorithm(&self) -> Result<Algorithm> {
        Algorithm::from_name(&self.name)
    }

    pub fn optimizer_config(
        &self,
        population: usize,
        dimension: usize,
        max_iterations: usize,
        seed: u64,
    ) -> Result<OptimizerConfig> {
        let mut c = OptimizerConfig::new(self.algorithm()?, population, dimension, max_iterations);
        c.seed = seed;
        if let Some(v) = self.epsilon {
            c.epsilon = v;
        }
        if let Some(v) = self.c1 {
            c.c1 = v;
        }
        if let Some(v) = self.c2 {
            c.c2 = v;
        }
        if let Some(v) = self.inertia {
            c.inertia = v;
        }
        if let Some(v) = self.chi {
            c.chi = v;
        }
        if let Some(v) = self.phi {
            c.phi = v;
        }
        if let Some(v) = self.neighborhood {
            c.neighborhood = v;
        }
        if let Some(v) = &self.lambda {
            c.lambda = Some(v.clone());
        }
        if let Some(v) = self.perturbation {
            c.perturbation = v;
        }
        if let Some(v) = self.v_max_fraction {
            c.v_max_fraction = v;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveSpec {
    pub name: String,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    /// Seed for the random shift/rotation of `_shifted`/`_rotated` names.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform_seed: Option<u64>,
}

fn default_dimension() -> usize {
    30
}

impl ObjectiveSpec {
    pub fn new(name: impl Into<String>, dimension: usize) -> Self {
        Self {
            name: name.into(),
            dimension,
            transform_seed: None,
        }
    }

    pub fn build(&self) -> Result<Objective> {
        Objective::by_name_with_seed(&self.name, self.dimension, self.transform_seed.unwrap_or(0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub trials: usize,
    pub master_seed: u64,
    pub population: usize,
    pub budget: Budget,
    pub history_stride: usize,
    pub output_dir: PathBuf,
    /// Worker threads for trials; 0 picks one per core.
    pub jobs: usize,
    pub algorithms: Vec<AlgorithmSpec>,
    pub objectives: Vec<ObjectiveSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            trials: 51,
            master_seed: 0,
            population: 40,
            budget: Budget::default(),
            history_stride: 1,
            output_dir: default_output_dir(),
            jobs: 0,
            algorithms: vec![AlgorithmSpec::named("pso"), AlgorithmSpec::named("gcpso")],
            objectives: BaseFunction::ALL
                .iter()
                .map(|f| ObjectiveSpec::new(f.name(), 30))
                .collect(),
        }
    }
}

/// `$GCPSO_OUTPUT_DIR` if set, otherwise `results`.
pub fn default_output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

impl ExperimentConfig {
    /// Small protocol for quick checks: 10 dimensions, 1000 iterations, 11 trials.
    pub fn desk() -> Self {
        Self {
            trials: 11,
            budget: Budget::Iterations(1000),
            objectives: BaseFunction::ALL
                .iter()
                .map(|f| ObjectiveSpec::new(f.name(), 10))
                .collect(),
            ..Self::default()
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn max_iterations(&self) -> Result<usize> {
        self.budget.iterations(self.population)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.history_stride < 1 {
            return Err(Error::config("history_stride", "must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::config("algorithms", "at least one algorithm is required"));
        }
        if self.objectives.is_empty() {
            return Err(Error::config("objectives", "at least one objective is required"));
        }
        let iters = self.max_iterations()?;
        let mut ids = HashSet::new();
        for spec in &self.algorithms {
            if !ids.insert(spec.id()) {
                return Err(Error::config(
                    "algorithms",
                    format!("duplicate algorithm id `{}`; set a distinct `label`", spec.id()),
                ));
            }
            for obj in &self.objectives {
                spec.optimizer_config(self.population, obj.dimension, iters, 0)?;
            }
        }
        let mut names = HashSet::new();
        for obj in &self.objectives {
            if !names.insert(obj.name.as_str()) {
                return Err(Error::config("objectives", format!("duplicate objective `{}`", obj.name)));
            }
            obj.build()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        let c = ExperimentConfig::from_toml_str("# nothing here\n").unwrap();
        assert_eq!(c.trials, 51);
        assert_eq!(c.max_iterations().unwrap(), 7499);
        assert_eq!(c.objectives.len(), 7);
    }

    #[test]
    fn round_trip() {
        let mut c = ExperimentConfig::desk();
        c.algorithms.push(AlgorithmSpec {
            name: "fips".into(),
            label: Some("fips-ring".into()),
            neighborhood: Some(Neighborhood::Ring),
            inertia: Some(InertiaSchedule::UniformRandom { lo: 0.4, hi: 0.9 }),
            ..AlgorithmSpec::default()
        });
        c.objectives[0].transform_seed = Some(9);
        let text = c.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), c);
    }

    #[test]
    fn unknown_key_rejected() {
        let err = ExperimentConfig::from_toml_str("trails = 3\n").unwrap_err().to_string();
        assert!(err.contains("trails"), "{err}");
        let err = ExperimentConfig::from_toml_str("[[algorithms]]\nname = \"pso\"\nepsilom = 0.1\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("epsilom"), "{err}");
    }

    #[test]
    fn parses_documented_example() {
        let text = r#"
trials = 11
master_seed = 7
[budget]
iterations = 1000
[[algorithms]]
name = "gcpso"
label = "gcpso-0.1"
epsilon = 0.1
inertia = { kind = "linear", start = 0.9, end = 0.4 }
[[objectives]]
name = "rastrigin_shifted_rotated"
dimension = 10
transform_seed = 3
"#;
        let c = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(c.algorithms[0].id(), "gcpso-0.1");
        assert_eq!(c.budget, Budget::Iterations(1000));
    }

    #[test]
    fn invalid_epsilon_rejected() {
        let err = ExperimentConfig::from_toml_str("[[algorithms]]\nname = \"gcpso\"\nepsilon = 1.5\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("epsilon"), "{err}");
    }

    #[test]
    fn duplicate_ids_rejected() {
        let mut c = ExperimentConfig::desk();
        c.algorithms = vec![AlgorithmSpec::named("pso"), AlgorithmSpec::named("pso")];
        assert!(c.validate().is_err());
    }

    #[test]
    fn evaluation_budget() {
        assert_eq!(Budget::Evaluations(300_000).iterations(40).unwrap(), 7499);
        assert!(Budget::Evaluations(40).iterations(40).is_err());
    }
}
