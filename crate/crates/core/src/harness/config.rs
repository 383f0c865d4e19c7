//! Run configuration: one flat key/value TOML file, CLI flags override.

use crate::credit::ReturnConfig;
use crate::optimizer::{OptimStep, PolicyStructure};
use crate::synthenv::{EnvConfig, EpisodeConfig, Variant};
use serde::{Deserialize, Serialize};
use std::path::Path;

use super::HarnessError;

/// Everything one training run needs, mirroring the TOML config keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    // return accumulation
    pub gamma: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub epsilon: f64,
    // optimizer
    pub clip_eps: f64,
    pub learning_rate: f64,
    pub kl_coefficient: f64,
    pub entropy_coefficient: f64,
    /// Trajectories sampled per question (N).
    pub group_size: usize,
    // sampling
    pub temperature: f64,
    pub top_p: f64,
    pub max_iterations: usize,
    // environment
    pub alphabet_size: usize,
    pub target_len: usize,
    pub reveal_prob: f64,
    pub variant: Variant,
    pub policy: PolicyStructure,
    pub n_train_tasks: usize,
    pub n_holdout_tasks: usize,
    /// Episodes drawn when evaluating a policy on held-out tasks.
    pub eval_episodes: usize,
    // run shape
    pub steps: usize,
    pub tasks_per_batch: usize,
    pub seed: u64,
    /// Start from the environment's warm-start policy (the analog of
    /// reinforcement learning on top of a supervised-finetuned model) rather
    /// than uniform weights.
    pub warm_start: bool,
    // ablation switches
    pub aux_rewards_on: bool,
    pub clipping_on: bool,
    pub out_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            gamma: 0.7,
            r_min: 0.0,
            r_max: 1.0,
            epsilon: 1e-8,
            clip_eps: 0.2,
            learning_rate: 0.5,
            kl_coefficient: 0.0,
            entropy_coefficient: 0.0,
            group_size: 16,
            temperature: 1.0,
            top_p: 0.95,
            max_iterations: 5,
            alphabet_size: 4,
            target_len: 3,
            reveal_prob: 0.5,
            variant: Variant::Revealing,
            policy: PolicyStructure::LinearSoftmax,
            n_train_tasks: 128,
            n_holdout_tasks: 64,
            eval_episodes: 256,
            steps: 400,
            tasks_per_batch: 32,
            seed: 42,
            warm_start: true,
            aux_rewards_on: true,
            clipping_on: true,
            out_dir: "runs/default".to_string(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.return_config().validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        self.optim_step().validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.max_iterations < 1 {
            return Err(HarnessError::Config("max_iterations must be >= 1".to_string()));
        }
        if self.alphabet_size < 2 || self.alphabet_size > 26 {
            return Err(HarnessError::Config(format!(
                "alphabet_size {} must be in 2..=26",
                self.alphabet_size
            )));
        }
        if self.target_len < 1 {
            return Err(HarnessError::Config("target_len must be >= 1".to_string()));
        }
        if !(0.0..=1.0).contains(&self.reveal_prob) {
            return Err(HarnessError::Config(format!(
                "reveal_prob {} must be in [0, 1]",
                self.reveal_prob
            )));
        }
        if self.tasks_per_batch < 1 {
            return Err(HarnessError::Config("tasks_per_batch must be >= 1".to_string()));
        }
        if self.n_train_tasks < 1 {
            return Err(HarnessError::Config("n_train_tasks must be >= 1".to_string()));
        }
        Ok(())
    }

    pub fn return_config(&self) -> ReturnConfig {
        ReturnConfig { gamma: self.gamma, r_min: self.r_min, r_max: self.r_max, epsilon: self.epsilon }
    }

    pub fn optim_step(&self) -> OptimStep {
        OptimStep {
            clip_eps: self.clip_eps,
            learning_rate: self.learning_rate,
            kl_coefficient: self.kl_coefficient,
            entropy_coefficient: self.entropy_coefficient,
            group_size: self.group_size,
            temperature: self.temperature,
            top_p: self.top_p,
        }
    }

    pub fn episode_config(&self) -> EpisodeConfig {
        EpisodeConfig {
            max_iterations: self.max_iterations,
            temperature: self.temperature,
            top_p: self.top_p,
            seed: self.seed,
        }
    }

    pub fn env_config(&self) -> EnvConfig {
        EnvConfig {
            alphabet_size: self.alphabet_size,
            target_len: self.target_len,
            reveal_prob: self.reveal_prob,
            variant: self.variant,
        }
    }
}
