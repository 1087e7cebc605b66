//! JSON experiment configuration and fail-fast validation.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::policies::Policy;
use crate::risk::{ArmSpec, BanditInstance};
use crate::simulator::default_checkpoints;
use crate::theory::XiPolicy;
use crate::Error;

/// Version stamped into every JSON artifact.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmConfig {
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub arms: Vec<ArmConfig>,
    pub gamma: f64,
    pub sigma_max_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub csv: String,
    pub summary: String,
    pub plot: String,
    pub theory: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            csv: "regret.csv".into(),
            summary: "summary.json".into(),
            plot: "regret.dat".into(),
            theory: "theory.json".into(),
        }
    }
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

fn default_policies() -> Vec<Policy> {
    vec![Policy::Erts, Policy::Uniform]
}

fn default_witness_epsilon() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub instance: InstanceConfig,
    #[serde(default = "default_policies")]
    pub policies: Vec<Policy>,
    pub horizon: usize,
    pub n_runs: usize,
    pub root_seed: u64,
    /// Defaults to the geometric grid {10², 10³, 10⁴, 5·10⁴} clipped to the horizon.
    #[serde(default)]
    pub checkpoints: Option<Vec<usize>>,
    #[serde(default)]
    pub xi: XiPolicy,
    #[serde(default = "default_witness_epsilon")]
    pub witness_epsilon: f64,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A configuration problem, naming the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: impl Into<String>, message: impl fmt::Display) -> Self {
        Self { field: field.into(), message: message.to_string() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config field `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// A configuration that passed every precondition.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub instance: BanditInstance,
    pub checkpoints: Vec<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| anyhow::anyhow!("cannot parse config {}: {e}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn build_instance(&self) -> Result<BanditInstance, ConfigError> {
        let inst = &self.instance;
        let mut arms = Vec::with_capacity(inst.arms.len());
        for (i, arm) in inst.arms.iter().enumerate() {
            let spec = ArmSpec::new(arm.mean, arm.variance).map_err(|e| match e {
                Error::Domain { name, .. } => ConfigError::new(format!("instance.arms[{i}].{name}"), e),
                other => ConfigError::new(format!("instance.arms[{i}]"), other),
            })?;
            arms.push(spec);
        }
        BanditInstance::new(arms, inst.gamma, inst.sigma_max_sq).map_err(|e| {
            let field = match &e {
                Error::TooFewArms(_) | Error::TiedOptimum { .. } => "instance.arms".to_string(),
                Error::VarianceCap { arm, .. } => format!("instance.arms[{arm}].variance"),
                Error::Domain { name, .. } => format!("instance.{name}"),
                _ => "instance".to_string(),
            };
            ConfigError::new(field, e)
        })
    }

    /// Checks every precondition of the simulator, policies and theory
    /// before anything runs.
    pub fn validate(&self) -> Result<Experiment, ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::new(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        let instance = self.build_instance()?;
        let arms = instance.num_arms();
        if self.policies.is_empty() {
            return Err(ConfigError::new("policies", "at least one policy is required"));
        }
        for (i, policy) in self.policies.iter().enumerate() {
            policy.validate().map_err(|e| ConfigError::new(format!("policies[{i}]"), e))?;
        }
        if self.horizon < arms {
            return Err(ConfigError::new(
                "horizon",
                format!("{} is shorter than the number of arms {arms}", self.horizon),
            ));
        }
        if self.n_runs == 0 {
            return Err(ConfigError::new("n_runs", "must be at least 1"));
        }
        self.xi.validate().map_err(|e| ConfigError::new("xi", e))?;
        if !(self.witness_epsilon.is_finite() && self.witness_epsilon > 0.0) {
            return Err(ConfigError::new("witness_epsilon", "must be finite and > 0"));
        }
        let checkpoints = match &self.checkpoints {
            None => default_checkpoints(arms, self.horizon),
            Some(list) => {
                if list.is_empty() {
                    return Err(ConfigError::new("checkpoints", "must not be empty"));
                }
                for (i, &n) in list.iter().enumerate() {
                    if n < arms.max(2) || n > self.horizon {
                        return Err(ConfigError::new(
                            format!("checkpoints[{i}]"),
                            format!("{n} is outside [{}, {}]", arms.max(2), self.horizon),
                        ));
                    }
                }
                list.clone()
            }
        };
        for (name, value) in [
            ("output.csv", &self.output.csv),
            ("output.summary", &self.output.summary),
            ("output.plot", &self.output.plot),
            ("output.theory", &self.output.theory),
        ] {
            if value.is_empty() {
                return Err(ConfigError::new(name, "file name must not be empty"));
            }
        }
        Ok(Experiment { config: self.clone(), instance, checkpoints })
    }
}
