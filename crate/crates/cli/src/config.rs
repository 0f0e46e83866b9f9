//! TOML configuration schema. Versioned and strict: unknown keys are
//! rejected so typos fail fast.

use anyhow::{bail, Context, Result};
use crowdmpc_core::bench::EpisodeOptions;
use crowdmpc_core::planner::PlannerConfig;
use crowdmpc_core::rewards::RewardWeights;
use crowdmpc_core::scene::KinematicsConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub config_version: u32,
    #[serde(default)]
    pub kinematics: KinematicsConfig,
    #[serde(default)]
    pub rewards: RewardWeights,
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default)]
    pub training: TrainingConfig,
    #[serde(default)]
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub bench: BenchConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingConfig {
    /// "nar" or "niar".
    pub model: String,
    pub goal_conditioned: bool,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub collision_weight: f64,
    pub enc_hidden: usize,
    pub soc_hidden: usize,
    pub rnn_hidden: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            model: "nar".into(),
            goal_conditioned: true,
            learning_rate: 3e-3,
            epochs: 40,
            batch_size: 24,
            collision_weight: 0.3,
            enc_hidden: 64,
            soc_hidden: 32,
            rnn_hidden: 64,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetConfig {
    pub paths: Vec<PathBuf>,
    pub frame_rate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    pub algorithms: Vec<String>,
    pub repeats: usize,
    pub goal_samples: usize,
    pub nar_weights: Option<PathBuf>,
    pub niar_goal_weights: Option<PathBuf>,
    pub niar_nogoal_weights: Option<PathBuf>,
    /// Reward-map file; absent means a large uniform free-space map.
    pub map: Option<PathBuf>,
    pub episode: EpisodeOptions,
    /// Keep only the first N scenes (0 = all).
    pub scene_limit: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            algorithms: vec!["mppi-nar".into(), "dwa".into()],
            repeats: 10,
            goal_samples: 64,
            nar_weights: None,
            niar_goal_weights: None,
            niar_nogoal_weights: None,
            map: None,
            episode: EpisodeOptions::default(),
            scene_limit: 0,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: Config = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        if cfg.config_version != CONFIG_VERSION {
            bail!(
                "config_version {} unsupported (expected {CONFIG_VERSION})",
                cfg.config_version
            );
        }
        cfg.kinematics.validate().context("kinematics")?;
        cfg.planner.validate().context("planner")?;
        if cfg.dataset.frame_rate < 0.0 {
            bail!("dataset.frame_rate must be non-negative");
        }
        Ok(cfg)
    }

    /// Resolve a path relative to the config file's directory.
    pub fn resolve(&self, config_path: &Path, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            config_path.parent().unwrap_or(Path::new(".")).join(p)
        }
    }
}
