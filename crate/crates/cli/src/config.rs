//! Run configuration files (TOML) and the shipped presets.

use std::path::{Path, PathBuf};

use cvqode_core::cvqnn::{Activation, NetworkConfig};
use cvqode_core::ode::{IVProblem, TrainConfig};
use cvqode_core::problems::problem_by_name;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable naming the directory that holds run directories
/// when a config does not set `output.dir`.
pub const OUTPUT_DIR_ENV: &str = "CVQODE_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_ROOT: &str = "runs";

pub const PRESETS: [(&str, &str); 3] = [
    ("linear", include_str!("../presets/linear.preset")),
    ("riccati", include_str!("../presets/riccati.preset")),
    ("stiff", include_str!("../presets/stiff.preset")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    pub network: NetworkSection,
    pub training: TrainingSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub name: String,
    /// Overrides the problem's default interval.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationName {
    #[default]
    Identity,
    Tanh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub modes: usize,
    pub layers: usize,
    pub cutoff: usize,
    #[serde(default)]
    pub activation: ActivationName,
    #[serde(default = "one")]
    pub input_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSection {
    pub learning_rate: f64,
    #[serde(default = "default_eps")]
    pub adam_eps: f64,
    #[serde(default = "default_beta1")]
    pub adam_beta1: f64,
    #[serde(default = "default_beta2")]
    pub adam_beta2: f64,
    pub max_steps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_grid")]
    pub grid_size: usize,
    #[serde(default)]
    pub snapshot_steps: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// RK4 steps per grid interval for problems without a closed form.
    #[serde(default = "default_substeps")]
    pub reference_substeps: usize,
    /// Print the loss every this many steps; 0 disables progress output.
    #[serde(default = "default_log_every")]
    pub log_every: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: None,
            reference_substeps: default_substeps(),
            log_every: default_log_every(),
        }
    }
}

fn one() -> f64 {
    1.0
}
fn default_eps() -> f64 {
    1e-5
}
fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_grid() -> usize {
    20
}
fn default_substeps() -> usize {
    1000
}
fn default_log_every() -> usize {
    50
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn preset(name: &str) -> Option<Self> {
        PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, text)| Self::parse(text).expect("shipped preset is valid"))
    }

    /// Reads `path`; a bare preset name is accepted when no such file exists.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        match std::fs::read_to_string(path) {
            Ok(text) => Self::parse(&text),
            Err(e) => path
                .to_str()
                .and_then(Self::preset)
                .ok_or_else(|| CliError::Config(format!("cannot read {}: {e}", path.display()))),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.ivp()?;
        self.network_config()?;
        self.train_config()
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if self.output.reference_substeps == 0 {
            return Err(CliError::Config("output.reference_substeps must be at least 1".into()));
        }
        Ok(())
    }

    pub fn ivp(&self) -> Result<IVProblem, CliError> {
        let p = problem_by_name(&self.problem.name).ok_or_else(|| {
            CliError::Config(format!(
                "unknown problem '{}' (expected linear, riccati or stiff)",
                self.problem.name
            ))
        })?;
        match self.problem.domain {
            Some([a, b]) => p.with_domain(a, b).map_err(|e| CliError::Config(e.to_string())),
            None => Ok(p),
        }
    }

    pub fn network_config(&self) -> Result<NetworkConfig, CliError> {
        let n = &self.network;
        let mut c = NetworkConfig::new(n.modes, n.layers, n.cutoff).map_err(|e| CliError::Config(e.to_string()))?;
        c.activation = match n.activation {
            ActivationName::Identity => Activation::Identity,
            ActivationName::Tanh => Activation::Tanh,
        };
        c.input_scale = n.input_scale;
        c.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(c)
    }

    pub fn train_config(&self) -> TrainConfig {
        let t = &self.training;
        TrainConfig {
            learning_rate: t.learning_rate,
            adam_beta1: t.adam_beta1,
            adam_beta2: t.adam_beta2,
            adam_eps: t.adam_eps,
            max_steps: t.max_steps,
            seed: t.seed,
            grid_size: t.grid_size,
            snapshot_steps: t.snapshot_steps.clone(),
        }
    }

    /// `override_dir`, then `output.dir`, then `$CVQODE_OUTPUT_DIR/<problem>`,
    /// then `runs/<problem>`.
    pub fn output_dir(&self, override_dir: Option<&Path>) -> PathBuf {
        if let Some(d) = override_dir.or(self.output.dir.as_deref()) {
            return d.to_path_buf();
        }
        let root = std::env::var_os(OUTPUT_DIR_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT));
        root.join(&self.problem.name)
    }
}
