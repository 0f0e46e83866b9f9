//! Shared domain types, frame normalization, neighbor selection and goal
//! clamping.

use crate::vec2::Vec2;
use crate::{DT, OBS_STEPS};
use serde::{Deserialize, Serialize};

/// Goal distance bounds in meters. Goal vectors fed to the models are always
/// clamped into this band so the policies never see out-of-distribution goal
/// magnitudes.
pub const GOAL_MIN_DIST: f64 = 3.0;
pub const GOAL_MAX_DIST: f64 = 10.0;

/// Neighbor selection: at most this many humans, within this radius.
pub const MAX_NEIGHBORS: usize = 5;
pub const NEIGHBOR_RADIUS: f64 = 5.0;

/// One recorded agent trajectory: strictly increasing timestamps with 2-D
/// positions. After resampling, consecutive timestamps differ by exactly
/// [`DT`].
#[derive(Debug, Clone, PartialEq)]
pub struct AgentTrack {
    pub agent_id: i64,
    pub samples: Vec<(f64, Vec2)>,
}

impl AgentTrack {
    pub fn new(agent_id: i64, samples: Vec<(f64, Vec2)>) -> Self {
        debug_assert!(
            samples.windows(2).all(|w| w[0].0 < w[1].0),
            "timestamps must be strictly increasing"
        );
        AgentTrack { agent_id, samples }
    }

    /// Grid index of the first sample, assuming the track lies on the global
    /// `DT` grid. Panics in debug builds when samples are off-grid.
    pub fn grid_start(&self) -> i64 {
        debug_assert!(self.is_on_grid());
        (self.samples[0].0 / DT).round() as i64
    }

    pub fn is_on_grid(&self) -> bool {
        self.samples.iter().all(|(t, _)| {
            let k = (t / DT).round();
            (t - k * DT).abs() < 1e-9
        }) && self
            .samples
            .windows(2)
            .all(|w| ((w[1].0 - w[0].0) - DT).abs() < 1e-9)
    }

    /// Position at a global grid index, if the track covers it.
    pub fn at_grid(&self, index: i64) -> Option<Vec2> {
        if self.samples.is_empty() {
            return None;
        }
        let start = self.grid_start();
        let off = index - start;
        if off < 0 || off as usize >= self.samples.len() {
            None
        } else {
            Some(self.samples[off as usize].1)
        }
    }
}

/// Robot pose and velocity. Heading is kept wrapped into `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub position: Vec2,
    pub heading: f64,
    pub linear_velocity: f64,
    pub angular_velocity: f64,
}

impl RobotState {
    pub fn new(position: Vec2, heading: f64, linear_velocity: f64, angular_velocity: f64) -> Self {
        RobotState {
            position,
            heading: wrap_angle(heading),
            linear_velocity,
            angular_velocity,
        }
    }

    /// Cartesian velocity implied by the stored polar velocity.
    pub fn cartesian_velocity(&self) -> Vec2 {
        Vec2::from_angle(self.heading) * self.linear_velocity
    }
}

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut a = theta.rem_euclid(two_pi);
    if a > std::f64::consts::PI {
        a -= two_pi;
    }
    a
}

/// Positions of all agents at one timestep plus the robot pose/velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneState {
    pub time_index: i64,
    pub robot: RobotState,
    pub humans: Vec<(i64, Vec2)>,
}

/// History of one agent over the last [`OBS_STEPS`] steps, oldest first.
/// Missing (padded) steps hold a zero position and a false validity bit;
/// padding only ever occurs at the oldest end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentHistory {
    pub agent_id: i64,
    pub positions: [Vec2; OBS_STEPS],
    pub valid: [bool; OBS_STEPS],
}

impl AgentHistory {
    /// Build from the most recent positions (oldest first); shorter inputs
    /// are zero-padded at the oldest end.
    pub fn from_recent(agent_id: i64, recent: &[Vec2]) -> Self {
        assert!(recent.len() <= OBS_STEPS, "history longer than {OBS_STEPS}");
        let mut positions = [Vec2::ZERO; OBS_STEPS];
        let mut valid = [false; OBS_STEPS];
        let pad = OBS_STEPS - recent.len();
        for (i, p) in recent.iter().enumerate() {
            positions[pad + i] = *p;
            valid[pad + i] = true;
        }
        AgentHistory {
            agent_id,
            positions,
            valid,
        }
    }

    /// Current (most recent) position. A history must contain at least one
    /// valid step to be meaningful; an all-padded history reports zero.
    pub fn current(&self) -> Vec2 {
        self.positions[OBS_STEPS - 1]
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    /// Velocity estimate from the last valid displacement, in m/s.
    /// Zero when fewer than two valid steps exist.
    pub fn last_velocity(&self) -> Vec2 {
        if self.valid[OBS_STEPS - 1] && self.valid[OBS_STEPS - 2] {
            (self.positions[OBS_STEPS - 1] - self.positions[OBS_STEPS - 2]) / DT
        } else {
            Vec2::ZERO
        }
    }

    /// Translate every valid position by `-offset` (padding stays zero).
    pub fn translated(&self, offset: Vec2) -> AgentHistory {
        let mut out = *self;
        for i in 0..OBS_STEPS {
            if out.valid[i] {
                out.positions[i] -= offset;
            }
        }
        out
    }
}

/// Per-agent observation histories, including the robot's own path.
/// Positions are expressed in whatever frame the caller chose; the spec-level
/// convention is the robot-relative frame produced by [`to_relative_frame`].
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub robot: AgentHistory,
    pub humans: Vec<AgentHistory>,
}

impl Observation {
    pub fn translated(&self, offset: Vec2) -> Observation {
        Observation {
            robot: self.robot.translated(offset),
            humans: self.humans.iter().map(|h| h.translated(offset)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GoalKind {
    RobotGoal,
    HumanGoal,
}

/// A goal position together with its role.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Goal {
    pub position: Vec2,
    pub kind: GoalKind,
}

/// Robot kinematic limits. Defaults follow the LoCoBot platform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KinematicsConfig {
    pub max_linear: f64,
    pub min_linear: f64,
    pub max_angular: f64,
    pub max_linear_accel: f64,
    pub max_angular_accel: f64,
    pub radius: f64,
}

impl Default for KinematicsConfig {
    fn default() -> Self {
        KinematicsConfig {
            max_linear: 0.7,
            min_linear: 0.0,
            max_angular: 1.0,
            max_linear_accel: 0.5,
            max_angular_accel: 3.2,
            radius: 0.2,
        }
    }
}

impl KinematicsConfig {
    pub fn validate(&self) -> crate::error::Result<()> {
        if self.max_linear < self.min_linear {
            return Err(crate::Error::InvalidConfig(
                "max_linear < min_linear".into(),
            ));
        }
        if self.max_linear_accel <= 0.0 || self.max_angular_accel <= 0.0 {
            return Err(crate::Error::InvalidConfig(
                "accelerations must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Translate points into the robot-relative frame (translation only, no
/// rotation): each output is `input - robot position`.
pub fn to_relative_frame(scene: &SceneState, points: &[Vec2]) -> Vec<Vec2> {
    let origin = scene.robot.position;
    points.iter().map(|p| *p - origin).collect()
}

/// Nearest agents to `center` among `candidates`, excluding `exclude_id`:
/// at most [`MAX_NEIGHBORS`], all within [`NEIGHBOR_RADIUS`], sorted
/// ascending by distance with ties broken by ascending agent id.
pub fn nearest_within(center: Vec2, candidates: &[(i64, Vec2)], exclude_id: Option<i64>) -> Vec<i64> {
    let mut scored: Vec<(f64, i64)> = candidates
        .iter()
        .filter(|(id, _)| Some(*id) != exclude_id)
        .map(|(id, p)| (p.dist(center), *id))
        .filter(|(d, _)| *d <= NEIGHBOR_RADIUS)
        .collect();
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    scored.truncate(MAX_NEIGHBORS);
    scored.into_iter().map(|(_, id)| id).collect()
}

/// The humans tracked by the planner: the five closest to the robot within
/// 5 m, sorted by distance (ties by ascending agent id).
pub fn select_neighbors(scene: &SceneState) -> Vec<i64> {
    nearest_within(scene.robot.position, &scene.humans, None)
}

/// Clamp a goal vector's magnitude into `[GOAL_MIN_DIST, GOAL_MAX_DIST]`,
/// preserving direction. The degenerate zero vector maps to `(3, 0)`.
pub fn clamp_goal(goal_vec: Vec2) -> Vec2 {
    match goal_vec.normalized() {
        Some(dir) => dir * goal_vec.norm().clamp(GOAL_MIN_DIST, GOAL_MAX_DIST),
        None => Vec2::new(GOAL_MIN_DIST, 0.0),
    }
}
