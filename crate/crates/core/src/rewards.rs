//! Reward signals for plan scoring: map navigability, collision avoidance,
//! human-behavior imitation, social influence, and their weighted sum.

use crate::error::{Error, Result};
use crate::predictor::GaussianStep;
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

pub const LOG_2PI: f64 = 1.8378770664093453;

/// 2-D grid of per-cell navigability rewards. Out-of-bounds lookups return
/// the configured `out_of_bounds` reward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardMap {
    pub origin: Vec2,
    pub resolution: f64,
    pub width: usize,
    pub height: usize,
    pub out_of_bounds: f64,
    /// Row-major cells: index = row * width + col.
    pub cells: Vec<f64>,
}

impl RewardMap {
    pub fn new(
        origin: Vec2,
        resolution: f64,
        width: usize,
        height: usize,
        out_of_bounds: f64,
        cells: Vec<f64>,
    ) -> Result<Self> {
        if resolution <= 0.0 {
            return Err(Error::MapFormat("resolution must be positive".into()));
        }
        if cells.len() != width * height {
            return Err(Error::MapFormat(format!(
                "cell count {} does not match {}x{}",
                cells.len(),
                width,
                height
            )));
        }
        Ok(RewardMap {
            origin,
            resolution,
            width,
            height,
            out_of_bounds,
            cells,
        })
    }

    /// Uniform map with every cell set to `value`.
    pub fn uniform(origin: Vec2, resolution: f64, width: usize, height: usize, value: f64) -> Self {
        RewardMap {
            origin,
            resolution,
            width,
            height,
            out_of_bounds: -1e3,
            cells: vec![value; width * height],
        }
    }

    pub fn set_cell(&mut self, col: usize, row: usize, value: f64) {
        self.cells[row * self.width + col] = value;
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let map: RewardMap = serde_json::from_str(&text)?;
        RewardMap::new(
            map.origin,
            map.resolution,
            map.width,
            map.height,
            map.out_of_bounds,
            map.cells,
        )
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(serde_json::to_string(self)?.as_bytes())?;
        Ok(())
    }
}

/// Weights of the reward terms plus the collision sigmoid parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardWeights {
    /// Map navigability weight.
    pub lambda_map: f64,
    /// Human collision weight.
    pub lambda_collision: f64,
    /// Human-imitation weight.
    pub lambda_imitation: f64,
    /// Social-influence weight (applied once per episode at the final step).
    pub lambda_social: f64,
    /// Collision sigmoid sharpness.
    pub beta: f64,
    /// Distance at which a collision is considered to occur, meters.
    pub gamma_coll: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            lambda_map: 1.0,
            lambda_collision: 1e3,
            lambda_imitation: 1.0,
            lambda_social: 1.0,
            beta: 35.0,
            gamma_coll: 0.2,
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Nearest-cell map lookup: the reward of the cell containing `position`,
/// or the out-of-bounds reward.
pub fn map_reward(map: &RewardMap, position: Vec2) -> f64 {
    let fx = (position.x - map.origin.x) / map.resolution;
    let fy = (position.y - map.origin.y) / map.resolution;
    if fx < 0.0 || fy < 0.0 {
        return map.out_of_bounds;
    }
    let col = fx.floor() as usize;
    let row = fy.floor() as usize;
    if col >= map.width || row >= map.height {
        return map.out_of_bounds;
    }
    map.cells[row * map.width + col]
}

/// Collision reward: `-sum_k [1 - sig(beta * (||robot - human_k|| - gamma_coll))]`.
/// Zero humans yield zero; each nearby human contributes up to -1.
pub fn collision_reward(robot_next: Vec2, humans_next: &[Vec2], beta: f64, gamma_coll: f64) -> f64 {
    -humans_next
        .iter()
        .map(|h| 1.0 - sigmoid(beta * (robot_next.dist(*h) - gamma_coll)))
        .sum::<f64>()
}

/// Imitation reward: log-density of the robot's Cartesian action under the
/// human policy's diagonal Gaussian, summed over both dimensions.
pub fn imitation_reward(robot_action: Vec2, step_density: &GaussianStep) -> f64 {
    step_density.log_pdf(robot_action)
}

/// Social influence reward: negative summed distance between human final
/// states predicted with and without the robot in the joint state.
pub fn social_influence_reward(
    conditioned_finals: &[Vec2],
    unconditioned_finals: &[Vec2],
) -> Result<f64> {
    if conditioned_finals.len() != unconditioned_finals.len() {
        return Err(Error::DimensionMismatch(format!(
            "social influence: {} conditioned vs {} unconditioned finals",
            conditioned_finals.len(),
            unconditioned_finals.len()
        )));
    }
    Ok(-conditioned_finals
        .iter()
        .zip(unconditioned_finals.iter())
        .map(|(a, b)| a.dist(*b))
        .sum::<f64>())
}

/// Weighted per-step reward over the map, collision and imitation signals.
pub fn total_step_reward(phi1: f64, phi2: f64, phi3: f64, w: &RewardWeights) -> f64 {
    w.lambda_map * phi1 + w.lambda_collision * phi2 + w.lambda_imitation * phi3
}

/// Undiscounted episode return: the sum of the per-step rewards plus the
/// social-influence term added once at the terminal step.
pub fn total_return(step_rewards: &[f64], phi4: f64, w: &RewardWeights) -> f64 {
    step_rewards.iter().sum::<f64>() + w.lambda_social * phi4
}
