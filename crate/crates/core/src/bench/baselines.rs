//! Baseline navigation policies: classic dynamic-window search, single-step
//! goal-conditioned behavior cloning, a constant-velocity predictor
//! stand-in, and trivial scripted policies for harness tests.

use crate::bench::runner::{NavigationPolicy, TickInput};
use crate::dynamics::{robot_step, velocity_window, PolarAction};
use crate::goal_forecast::compute_human_goals;
use crate::predictor::{
    nar_conditional_with, niar_rollout_agent_with, AgentSeed, GaussianStep, LatentNoise, Params,
};
use crate::rewards::RewardMap;
use crate::scene::{clamp_goal, select_neighbors, wrap_angle, AgentHistory};
use crate::seeding::derive;
use crate::vec2::Vec2;
use crate::{DT, ROBOT_ID};

/// Constant-velocity conditional: the mean continues each agent's last
/// observed displacement; the spread is a fixed configuration value.
/// Interface-compatible with the learned per-agent conditionals.
pub fn constant_velocity_conditional(histories: &[AgentHistory], log_std: f64) -> Vec<GaussianStep> {
    histories
        .iter()
        .map(|h| GaussianStep::new(h.last_velocity() * DT, [log_std, log_std]))
        .collect()
}

/// Classic dynamic-window search: enumerate a velocity grid inside the
/// window, simulate constant-velocity arcs, and score goal heading,
/// clearance to the currently observed humans, and speed.
#[derive(Debug, Clone, Copy)]
pub struct DwaConfig {
    pub linear_samples: usize,
    pub angular_samples: usize,
    pub goal_weight: f64,
    pub clearance_weight: f64,
    pub speed_weight: f64,
    /// Arc simulation steps.
    pub horizon: usize,
    /// Clearance saturates here, meters.
    pub clearance_cap: f64,
    /// Arcs passing closer than this are discarded.
    pub min_clearance: f64,
}

impl Default for DwaConfig {
    fn default() -> Self {
        DwaConfig {
            linear_samples: 7,
            angular_samples: 15,
            goal_weight: 1.0,
            clearance_weight: 2.0,
            speed_weight: 0.5,
            horizon: crate::HORIZON,
            clearance_cap: 1.0,
            min_clearance: 0.25,
        }
    }
}

pub struct DwaPolicy {
    pub config: DwaConfig,
}

impl DwaPolicy {
    pub fn new(config: DwaConfig) -> Self {
        DwaPolicy { config }
    }

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        if n <= 1 || hi <= lo {
            return vec![lo];
        }
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    fn score(&self, input: &TickInput<'_>, v: f64, w: f64) -> f64 {
        let cfg = &self.config;
        let mut state = input.robot;
        let mut clearance = cfg.clearance_cap;
        let humans: Vec<Vec2> = input.humans.iter().map(|h| h.current()).collect();
        for _ in 0..cfg.horizon {
            let (next, _) = robot_step(&state, PolarAction::new(v, w), input.dt);
            state = next;
            for h in &humans {
                clearance = clearance.min(state.position.dist(*h));
            }
        }
        if clearance < cfg.min_clearance {
            return f64::NEG_INFINITY;
        }
        // Goal heading judges how the arc's final heading aligns with the
        // goal bearing from the current position. Measuring the bearing at
        // the arc end instead would punish plain approach (the same lateral
        // offset subtends a growing angle as distance shrinks) and make
        // stopping near the goal outscore reaching it.
        let bearing = (input.robot_goal - input.robot.position).angle();
        let heading_err = wrap_angle(bearing - state.heading).abs();
        cfg.goal_weight * (std::f64::consts::PI - heading_err)
            + cfg.clearance_weight * clearance
            + cfg.speed_weight * v
    }
}

impl NavigationPolicy for DwaPolicy {
    fn name(&self) -> &'static str {
        "dwa"
    }

    fn reset(&mut self, _seed: u64) {}

    fn tick(&mut self, input: &TickInput<'_>) -> PolarAction {
        let win = velocity_window(
            (input.robot.linear_velocity, input.robot.angular_velocity),
            input.kinematics,
            input.dt,
        );
        let linears = Self::grid(win.linear.0, win.linear.1, self.config.linear_samples);
        let mut angulars = Self::grid(win.angular.0, win.angular.1, self.config.angular_samples);
        // Deterministic tie-break: lowest |angular| first, positive before
        // negative, higher speed before lower; strict improvement wins.
        angulars.sort_by(|a, b| {
            a.abs()
                .partial_cmp(&b.abs())
                .unwrap()
                .then((*a < 0.0).cmp(&(*b < 0.0)))
        });
        let mut best = PolarAction::new(win.linear.0, 0.0);
        let mut best_score = f64::NEG_INFINITY;
        for w in &angulars {
            for v in linears.iter().rev() {
                let s = self.score(input, *v, *w);
                if s > best_score {
                    best_score = s;
                    best = PolarAction::new(*v, *w);
                }
            }
        }
        if best_score == f64::NEG_INFINITY {
            // Every arc collides: stop as hard as the window allows.
            let stop_v = if win.linear.0 <= 0.0 && win.linear.1 >= 0.0 {
                0.0
            } else {
                win.linear.0
            };
            return PolarAction::new(stop_v, win.angular.0.max((-0.0_f64).min(win.angular.1)));
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GcbcKind {
    Nar,
    Niar,
}

/// Single-step behavior cloning: take the predictor's mean next action for
/// the robot-as-human toward its goal and convert it to the nearest
/// feasible polar action. No look-ahead planning.
pub struct GcbcPolicy {
    pub kind: GcbcKind,
    predictor: Params,
    /// Goal-unconditioned NIAR for forecasting the neighbors' goals
    /// when the NAR conditional needs them.
    niar_nogoal: Option<Params>,
    map: RewardMap,
    goal_samples: usize,
    episode_seed: u64,
    tick: u64,
}

impl GcbcPolicy {
    pub fn new(
        kind: GcbcKind,
        predictor: Params,
        niar_nogoal: Option<Params>,
        map: RewardMap,
        goal_samples: usize,
    ) -> Self {
        GcbcPolicy {
            kind,
            predictor,
            niar_nogoal,
            map,
            goal_samples,
            episode_seed: 0,
            tick: 0,
        }
    }

    /// Cartesian mean displacement -> polar action: steer toward the
    /// displacement bearing; move only when it points forward.
    pub fn to_polar(displacement: Vec2, heading: f64, dt: f64) -> PolarAction {
        if displacement.norm() < 1e-9 {
            return PolarAction::default();
        }
        let delta = wrap_angle(displacement.angle() - heading);
        let linear = (displacement.norm() / dt) * delta.cos().max(0.0);
        PolarAction::new(linear, delta / dt)
    }

    fn mean_action(&mut self, input: &TickInput<'_>) -> crate::error::Result<Vec2> {
        let tick_seed = derive(self.episode_seed, self.tick);
        self.tick += 1;
        let goal = input.robot.position + clamp_goal(input.robot_goal - input.robot.position);
        match self.kind {
            GcbcKind::Niar => {
                // Blind to other humans: the mode trajectory's first action.
                let roll = niar_rollout_agent_with(
                    &self.predictor,
                    &input.robot_history,
                    Some(goal),
                    &LatentNoise::zeros(),
                )?;
                Ok(roll.actions[0])
            }
            GcbcKind::Nar => {
                let scene = input.scene_state();
                let neighbor_ids = select_neighbors(&scene);
                let histories: Vec<AgentHistory> = neighbor_ids
                    .iter()
                    .map(|id| *input.humans.iter().find(|h| h.agent_id == *id).unwrap())
                    .collect();
                let niar = self
                    .niar_nogoal
                    .as_ref()
                    .expect("gcbc-nar requires the goal-forecast model");
                let forecasts = compute_human_goals(
                    &histories,
                    niar,
                    &self.map,
                    self.goal_samples,
                    derive(tick_seed, 0x6f61),
                )?;
                let mut seeds = vec![AgentSeed {
                    id: ROBOT_ID,
                    history: input.robot_history,
                    goal: Some(goal),
                }];
                for (h, f) in histories.iter().zip(forecasts.iter()) {
                    seeds.push(AgentSeed {
                        id: h.agent_id,
                        history: *h,
                        goal: Some(f.goal.position),
                    });
                }
                let gauss = nar_conditional_with(&self.predictor, &seeds, &[])?;
                Ok(gauss[0].mean)
            }
        }
    }
}

impl NavigationPolicy for GcbcPolicy {
    fn name(&self) -> &'static str {
        match self.kind {
            GcbcKind::Nar => "gcbc-nar",
            GcbcKind::Niar => "gcbc-niar",
        }
    }

    fn reset(&mut self, episode_seed: u64) {
        self.episode_seed = episode_seed;
        self.tick = 0;
    }

    fn tick(&mut self, input: &TickInput<'_>) -> PolarAction {
        match self.mean_action(input) {
            Ok(mean) => Self::to_polar(mean, input.robot.heading, input.dt),
            Err(_) => PolarAction::default(),
        }
    }
}

/// Steer straight at the goal at full speed; ignores humans.
pub struct GoalSeekPolicy;

impl NavigationPolicy for GoalSeekPolicy {
    fn name(&self) -> &'static str {
        "goal-seek"
    }

    fn reset(&mut self, _seed: u64) {}

    fn tick(&mut self, input: &TickInput<'_>) -> PolarAction {
        let to_goal = input.robot_goal - input.robot.position;
        GcbcPolicy::to_polar(
            to_goal.normalized().unwrap_or(Vec2::ZERO) * (input.kinematics.max_linear * input.dt),
            input.robot.heading,
            input.dt,
        )
    }
}

/// Never moves.
pub struct IdlePolicy;

impl NavigationPolicy for IdlePolicy {
    fn name(&self) -> &'static str {
        "idle"
    }

    fn reset(&mut self, _seed: u64) {}

    fn tick(&mut self, _input: &TickInput<'_>) -> PolarAction {
        PolarAction::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::KinematicsConfig;
    use crate::scene::RobotState;

    #[test]
    fn constant_velocity_examples() {
        let moving = AgentHistory::from_recent(0, &[Vec2::ZERO, Vec2::new(0.4, 0.0)]);
        let still = AgentHistory::from_recent(1, &[Vec2::new(1.0, 1.0), Vec2::new(1.0, 1.0)]);
        let padded = AgentHistory::from_recent(2, &[]);
        let out = constant_velocity_conditional(&[moving, still, padded], -1.0);
        assert!((out[0].mean - Vec2::new(0.4, 0.0)).norm() < 1e-12);
        assert_eq!(out[1].mean, Vec2::ZERO);
        assert_eq!(out[2].mean, Vec2::ZERO);
        assert_eq!(out[0].log_std, [-1.0, -1.0]);
    }

    #[test]
    fn to_polar_conversion() {
        // Forward displacement: speed = norm / dt.
        let a = GcbcPolicy::to_polar(Vec2::new(0.2, 0.0), 0.0, 0.4);
        assert!((a.linear - 0.5).abs() < 1e-12);
        assert_eq!(a.angular, 0.0);

        let zero = GcbcPolicy::to_polar(Vec2::ZERO, 1.0, 0.4);
        assert_eq!(zero, PolarAction::default());

        // Behind the robot: rotation-dominant, no forward motion.
        let back = GcbcPolicy::to_polar(Vec2::new(-0.2, 0.0), 0.0, 0.4);
        assert_eq!(back.linear, 0.0);
        assert!(back.angular.abs() > 0.0);
    }

    fn tick_input<'a>(
        robot: RobotState,
        humans: Vec<AgentHistory>,
        goal: Vec2,
        kin: &'a KinematicsConfig,
    ) -> TickInput<'a> {
        TickInput {
            time_index: 7,
            robot,
            robot_history: AgentHistory::from_recent(ROBOT_ID, &[robot.position]),
            humans,
            robot_goal: goal,
            dt: 0.4,
            kinematics: kin,
        }
    }

    #[test]
    fn dwa_empty_scene_drives_at_goal() {
        let kin = KinematicsConfig::default();
        let robot = RobotState::new(Vec2::ZERO, 0.0, 0.7, 0.0);
        let input = tick_input(robot, vec![], Vec2::new(8.0, 0.0), &kin);
        let mut dwa = DwaPolicy::new(DwaConfig::default());
        let a = dwa.tick(&input);
        assert_eq!(a.linear, 0.7);
        assert_eq!(a.angular, 0.0);
    }

    #[test]
    fn dwa_blocked_by_human_deviates_or_stops() {
        let kin = KinematicsConfig::default();
        let robot = RobotState::new(Vec2::ZERO, 0.0, 0.7, 0.0);
        let blocker = AgentHistory::from_recent(5, &[Vec2::new(0.3, 0.0)]);
        let input = tick_input(robot, vec![blocker], Vec2::new(8.0, 0.0), &kin);
        let mut dwa = DwaPolicy::new(DwaConfig::default());
        let a = dwa.tick(&input);
        let straight_on = a.angular.abs() < 1e-9 && a.linear >= 0.69;
        assert!(!straight_on, "kept driving into the blocker: {a:?}");
    }

    #[test]
    fn dwa_symmetric_tie_breaks_deterministically() {
        let kin = KinematicsConfig::default();
        let robot = RobotState::new(Vec2::ZERO, 0.0, 0.7, 0.0);
        let input = tick_input(robot, vec![], Vec2::new(8.0, 0.0), &kin);
        let mut dwa = DwaPolicy::new(DwaConfig::default());
        let a = dwa.tick(&input);
        let b = dwa.tick(&input);
        assert_eq!(a, b);
        // Goal dead ahead: zero angular velocity wins the tie.
        assert_eq!(a.angular, 0.0);
    }
}
