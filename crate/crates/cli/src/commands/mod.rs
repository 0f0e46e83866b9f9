//! Subcommand implementations.

pub mod bench;
pub mod goals;
pub mod plot;
pub mod replay;
pub mod train;

use crate::config::Config;
use anyhow::{bail, Context, Result};
use crowdmpc_core::bench::{
    load_trajectories, make_scenes, BenchScene, DwaConfig, DwaPolicy, GcbcKind, GcbcPolicy,
    GoalSeekPolicy, IdlePolicy, MpcNavigator, NavigationPolicy, SceneSet,
};
use crowdmpc_core::planner::{OptimizerKind, PlannerConfig};
use crowdmpc_core::predictor::{load_weights, Params};
use crowdmpc_core::rewards::RewardMap;
use crowdmpc_core::scene::AgentTrack;
use crowdmpc_core::vec2::Vec2;
use std::path::Path;

/// Load all dataset files and resample onto the planning grid.
pub fn load_tracks(cfg: &Config, config_path: &Path) -> Result<Vec<AgentTrack>> {
    if cfg.dataset.paths.is_empty() {
        bail!("dataset.paths is empty");
    }
    let mut tracks = Vec::new();
    for p in &cfg.dataset.paths {
        let path = cfg.resolve(config_path, p);
        let mut t = load_trajectories(&path, cfg.dataset.frame_rate)
            .with_context(|| format!("loading {}", path.display()))?;
        // Keep ids unique across files.
        let base = tracks
            .iter()
            .map(|t: &AgentTrack| t.agent_id)
            .max()
            .map(|m| m + 1)
            .unwrap_or(0);
        for track in t.iter_mut() {
            track.agent_id += base;
        }
        tracks.extend(t);
    }
    Ok(tracks)
}

pub fn build_scenes(cfg: &Config, config_path: &Path, seed: u64) -> Result<SceneSet> {
    let tracks = load_tracks(cfg, config_path)?;
    let mut set = make_scenes(&tracks, seed);
    if cfg.bench.scene_limit > 0 && set.scenes.len() > cfg.bench.scene_limit {
        set.scenes.truncate(cfg.bench.scene_limit);
    }
    if set.scenes.is_empty() {
        bail!("no benchmark scenes could be built ({} windows skipped)", set.skipped);
    }
    Ok(set)
}

pub fn load_map(cfg: &Config, config_path: &Path) -> Result<RewardMap> {
    match &cfg.bench.map {
        Some(p) => {
            let path = cfg.resolve(config_path, p);
            Ok(RewardMap::load(&path).with_context(|| format!("loading map {}", path.display()))?)
        }
        // Free space everywhere, generously sized around the origin.
        None => Ok(RewardMap::uniform(
            Vec2::new(-200.0, -200.0),
            1.0,
            400,
            400,
            0.0,
        )),
    }
}

/// Weights needed by the learned algorithms, loaded lazily.
pub struct ModelBundle {
    pub nar: Option<Params>,
    pub niar_goal: Option<Params>,
    pub niar_nogoal: Option<Params>,
}

impl ModelBundle {
    pub fn load(cfg: &Config, config_path: &Path) -> Result<ModelBundle> {
        let lift = |p: &Option<std::path::PathBuf>| -> Result<Option<Params>> {
            match p {
                None => Ok(None),
                Some(p) => {
                    let path = cfg.resolve(config_path, p);
                    let w = load_weights(&path)
                        .with_context(|| format!("loading weights {}", path.display()))?;
                    Ok(Some(Params::lift(&w)?))
                }
            }
        };
        Ok(ModelBundle {
            nar: lift(&cfg.bench.nar_weights)?,
            niar_goal: lift(&cfg.bench.niar_goal_weights)?,
            niar_nogoal: lift(&cfg.bench.niar_nogoal_weights)?,
        })
    }
}

/// Build one navigation policy by name.
pub fn build_policy(
    name: &str,
    cfg: &Config,
    models: &ModelBundle,
    map: &RewardMap,
) -> Result<Box<dyn NavigationPolicy>> {
    let need = |p: &Option<Params>, what: &str| -> Result<Params> {
        p.clone()
            .ok_or_else(|| anyhow::anyhow!("algorithm '{name}' needs {what} in [bench]"))
    };
    let policy: Box<dyn NavigationPolicy> = match name {
        "mppi-nar" | "cem-nar" => {
            let planner = PlannerConfig {
                optimizer: if name == "mppi-nar" {
                    OptimizerKind::Mppi
                } else {
                    OptimizerKind::Cem
                },
                ..cfg.planner
            };
            Box::new(MpcNavigator::new(
                need(&models.nar, "nar_weights")?,
                need(&models.niar_nogoal, "niar_nogoal_weights")?,
                map.clone(),
                planner,
                cfg.rewards,
                cfg.bench.goal_samples,
            ))
        }
        "gcbc-nar" => Box::new(GcbcPolicy::new(
            GcbcKind::Nar,
            need(&models.nar, "nar_weights")?,
            Some(need(&models.niar_nogoal, "niar_nogoal_weights")?),
            map.clone(),
            cfg.bench.goal_samples,
        )),
        "gcbc-niar" => Box::new(GcbcPolicy::new(
            GcbcKind::Niar,
            need(&models.niar_goal, "niar_goal_weights")?,
            None,
            map.clone(),
            cfg.bench.goal_samples,
        )),
        "dwa" => Box::new(DwaPolicy::new(DwaConfig::default())),
        "goal-seek" => Box::new(GoalSeekPolicy),
        "idle" => Box::new(IdlePolicy),
        other => bail!("unknown algorithm '{other}'"),
    };
    Ok(policy)
}

pub fn scene_by_index(set: &SceneSet, index: usize) -> Result<&BenchScene> {
    set.scenes
        .get(index)
        .ok_or_else(|| anyhow::anyhow!("scene {index} out of range (have {})", set.scenes.len()))
}
