//! Episode simulation against replayed crowds, and the MPC navigator that
//! adapts the planner to the tick interface.
//!
//! The robot replaces the designated human: it inherits that human's
//! observed prefix as its own history, takes over at the last observed
//! step, and must reach the human's endpoint while every other human
//! replays from data (non-reactive). Every algorithm's action passes
//! through dynamic-window clipping, whatever the algorithm did internally.

use crate::bench::scenes::BenchScene;
use crate::bench::{compute_metrics, BenchReport, MetricSet};
use crate::dynamics::{dynamic_window_clip, robot_step, PolarAction};
use crate::error::Result;
use crate::goal_forecast::compute_human_goals;
use crate::planner::{
    cem_step, mppi_step, GaussianPlanPolicy, OptimizerKind, PlannerConfig, PlannerHuman,
    PlanningInput, TickDiagnostics,
};
use crate::predictor::Params;
use crate::rewards::{RewardMap, RewardWeights};
use crate::scene::{
    clamp_goal, select_neighbors, AgentHistory, KinematicsConfig, RobotState, SceneState,
};
use crate::seeding::derive;
use crate::vec2::Vec2;
use crate::OBS_STEPS;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// What one navigation tick sees: the live scene with per-agent histories,
/// all in world coordinates.
#[derive(Debug, Clone)]
pub struct TickInput<'a> {
    /// Scene-relative step index of the current state.
    pub time_index: usize,
    pub robot: RobotState,
    pub robot_history: AgentHistory,
    /// Visible humans with their observed histories.
    pub humans: Vec<AgentHistory>,
    pub robot_goal: Vec2,
    pub dt: f64,
    pub kinematics: &'a KinematicsConfig,
}

impl TickInput<'_> {
    pub fn scene_state(&self) -> SceneState {
        SceneState {
            time_index: self.time_index as i64,
            robot: self.robot,
            humans: self.humans.iter().map(|h| (h.agent_id, h.current())).collect(),
        }
    }
}

/// A navigation algorithm under benchmark: one action per tick.
pub trait NavigationPolicy: Send {
    fn name(&self) -> &'static str;
    /// Fresh episode with a new random stream.
    fn reset(&mut self, episode_seed: u64);
    fn tick(&mut self, input: &TickInput<'_>) -> PolarAction;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Success,
    Collision,
    Timeout,
}

/// Episode termination settings.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpisodeOptions {
    /// Goal-reached radius, meters. Kept below the wide collision metric
    /// threshold so success cannot mask a collision.
    pub goal_radius: f64,
    /// Center distance that terminates the episode as a collision.
    pub collision_radius: f64,
    /// Control time budget in seconds (the nominal traverse plus tolerance).
    pub time_limit: f64,
    pub dt: f64,
}

impl Default for EpisodeOptions {
    fn default() -> Self {
        EpisodeOptions {
            goal_radius: 0.3,
            collision_radius: 0.2,
            time_limit: 16.4 + 8.0,
            dt: crate::DT,
        }
    }
}

/// Record of one benchmark episode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub scene_index: usize,
    pub repeat: usize,
    pub outcome: Outcome,
    /// Robot positions from takeover (inclusive) to episode end.
    pub robot_path: Vec<Vec2>,
    /// Clipped commands actually executed.
    pub commands: Vec<PolarAction>,
    pub min_human_distance: f64,
    pub robot_path_length: f64,
    /// The designated human's path length over the scene.
    pub human_path_length: f64,
    /// Control seconds elapsed.
    pub duration: f64,
}

/// History of a replayed human up to (and including) a scene step.
fn human_history(scene: &BenchScene, id: i64, step: usize) -> AgentHistory {
    let mut recent = Vec::with_capacity(OBS_STEPS);
    let lo = step.saturating_sub(OBS_STEPS - 1);
    for s in lo..=step {
        if let Some((_, p)) = scene.humans_at(s).iter().find(|(hid, _)| *hid == id) {
            recent.push(*p);
        } else {
            // Histories restart when presence breaks; only the newest
            // contiguous run matters.
            recent.clear();
        }
    }
    AgentHistory::from_recent(id, &recent)
}

/// Run one episode of one algorithm on one scene.
pub fn run_episode(
    scene: &BenchScene,
    policy: &mut dyn NavigationPolicy,
    kinematics: &KinematicsConfig,
    opts: &EpisodeOptions,
    episode_seed: u64,
    scene_index: usize,
    repeat: usize,
) -> EpisodeLog {
    policy.reset(episode_seed);

    let mut robot = scene.robot_start;
    let mut robot_recent: Vec<Vec2> = scene.designated_path[..OBS_STEPS].to_vec();
    let mut robot_path = vec![robot.position];
    let mut commands = Vec::new();
    let mut min_dist = f64::INFINITY;
    let mut path_len = 0.0;

    // Takeover happens at the last observed step.
    let mut step_index = OBS_STEPS - 1;
    let max_steps = (opts.time_limit / opts.dt).ceil() as usize;

    // Humans may already be close at takeover.
    for (_, p) in scene.humans_at(step_index) {
        min_dist = min_dist.min(robot.position.dist(*p));
    }

    let mut outcome = Outcome::Timeout;
    let mut steps_taken = 0usize;
    for _ in 0..max_steps {
        let humans: Vec<AgentHistory> = scene
            .humans_at(step_index)
            .iter()
            .map(|(id, _)| human_history(scene, *id, step_index))
            .collect();
        let input = TickInput {
            time_index: step_index,
            robot,
            robot_history: AgentHistory::from_recent(
                crate::ROBOT_ID,
                &robot_recent[robot_recent.len().saturating_sub(OBS_STEPS)..],
            ),
            humans,
            robot_goal: scene.robot_goal,
            dt: opts.dt,
            kinematics,
        };
        let raw = policy.tick(&input);
        // Protocol: clip every algorithm's action, whatever it returned.
        let action = dynamic_window_clip(
            raw,
            (robot.linear_velocity, robot.angular_velocity),
            kinematics,
            opts.dt,
        );
        let (next, cart) = robot_step(&robot, action, opts.dt);
        robot = next;
        path_len += cart.displacement.norm();
        robot_recent.push(robot.position);
        robot_path.push(robot.position);
        commands.push(action);
        step_index += 1;
        steps_taken += 1;

        for (_, p) in scene.humans_at(step_index) {
            min_dist = min_dist.min(robot.position.dist(*p));
        }
        if min_dist < opts.collision_radius {
            outcome = Outcome::Collision;
            break;
        }
        if robot.position.dist(scene.robot_goal) <= opts.goal_radius {
            outcome = Outcome::Success;
            break;
        }
    }

    EpisodeLog {
        scene_index,
        repeat,
        outcome,
        robot_path,
        commands,
        min_human_distance: min_dist,
        robot_path_length: path_len,
        human_path_length: scene.designated_path_length(),
        duration: steps_taken as f64 * opts.dt,
    }
}

/// Run the scene/repeat matrix for one algorithm. Episodes parallelize
/// with per-episode seed streams and an index-ordered reduction, so worker
/// count never changes the report.
pub fn run_benchmark(
    scenes: &[BenchScene],
    factory: &(dyn Fn() -> Box<dyn NavigationPolicy> + Sync),
    repeats: usize,
    kinematics: &KinematicsConfig,
    opts: &EpisodeOptions,
    seed: u64,
) -> BenchReport {
    let jobs: Vec<(usize, usize)> = (0..repeats)
        .flat_map(|r| (0..scenes.len()).map(move |s| (r, s)))
        .collect();
    let episodes: Vec<EpisodeLog> = jobs
        .par_iter()
        .map(|(repeat, scene_idx)| {
            let mut policy = factory();
            let episode_seed = derive(seed, (*repeat as u64) << 32 | *scene_idx as u64);
            run_episode(
                &scenes[*scene_idx],
                policy.as_mut(),
                kinematics,
                opts,
                episode_seed,
                *scene_idx,
                *repeat,
            )
        })
        .collect();

    let per_repeat: Vec<MetricSet> = (0..repeats)
        .map(|r| {
            let slice: Vec<EpisodeLog> = episodes
                .iter()
                .filter(|e| e.repeat == r)
                .cloned()
                .collect();
            compute_metrics(&slice)
        })
        .collect();
    let name = factory().name();

    BenchReport {
        algorithm: name.to_string(),
        scenes: scenes.len(),
        repeats,
        metrics: MetricSet::mean(&per_repeat),
        per_repeat,
        episodes,
        runtime_ms: None,
    }
}

/// The sampling-MPC navigator: forecasts human goals with the
/// goal-unconditioned NIAR model, then optimizes a plan with MPPI or CEM
/// against the goal-conditioned NAR crowd model.
pub struct MpcNavigator {
    pub nar: Params,
    pub niar_nogoal: Params,
    pub map: RewardMap,
    pub planner: PlannerConfig,
    pub rewards: RewardWeights,
    pub goal_samples: usize,
    policy: GaussianPlanPolicy,
    episode_seed: u64,
    tick: u64,
    last_diagnostics: Option<TickDiagnostics>,
}

impl MpcNavigator {
    pub fn new(
        nar: Params,
        niar_nogoal: Params,
        map: RewardMap,
        planner: PlannerConfig,
        rewards: RewardWeights,
        goal_samples: usize,
    ) -> Self {
        let policy = GaussianPlanPolicy::new(planner.horizon, (planner.sigma_linear, planner.sigma_angular));
        MpcNavigator {
            nar,
            niar_nogoal,
            map,
            planner,
            rewards,
            goal_samples,
            policy,
            episode_seed: 0,
            tick: 0,
        last_diagnostics: None,
        }
    }

    pub fn last_diagnostics(&self) -> Option<&TickDiagnostics> {
        self.last_diagnostics.as_ref()
    }

    /// One full planner tick on arbitrary input; also used by the replay
    /// command. Errors surface as a stop command plus a diagnostic reset.
    pub fn plan(&mut self, input: &TickInput<'_>) -> Result<PolarAction> {
        let tick_seed = derive(self.episode_seed, self.tick);
        self.tick += 1;

        let scene = input.scene_state();
        let neighbor_ids = select_neighbors(&scene);
        let histories: Vec<AgentHistory> = neighbor_ids
            .iter()
            .map(|id| {
                *input
                    .humans
                    .iter()
                    .find(|h| h.agent_id == *id)
                    .expect("neighbor came from this scene")
            })
            .collect();

        let forecasts = compute_human_goals(
            &histories,
            &self.niar_nogoal,
            &self.map,
            self.goal_samples,
            derive(tick_seed, 0x6f61),
        )?;

        let humans: Vec<PlannerHuman> = histories
            .iter()
            .zip(forecasts.iter())
            .map(|(h, f)| PlannerHuman {
                id: h.agent_id,
                history: *h,
                goal: f.goal.position,
            })
            .collect();

        let goal_rel = clamp_goal(input.robot_goal - input.robot.position);
        let planning = PlanningInput {
            robot: input.robot,
            robot_history: input.robot_history,
            robot_goal: input.robot.position + goal_rel,
            humans,
            map: &self.map,
            kinematics: input.kinematics,
            rewards: &self.rewards,
        };
        let (command, diag) = match self.planner.optimizer {
            OptimizerKind::Mppi => {
                mppi_step(&planning, &mut self.policy, &self.nar, &self.planner, tick_seed)?
            }
            OptimizerKind::Cem => {
                cem_step(&planning, &mut self.policy, &self.nar, &self.planner, tick_seed)?
            }
        };
        self.last_diagnostics = Some(diag);
        Ok(command)
    }
}

impl NavigationPolicy for MpcNavigator {
    fn name(&self) -> &'static str {
        match self.planner.optimizer {
            OptimizerKind::Mppi => "mppi-nar",
            OptimizerKind::Cem => "cem-nar",
        }
    }

    fn reset(&mut self, episode_seed: u64) {
        self.episode_seed = episode_seed;
        self.tick = 0;
        self.policy = GaussianPlanPolicy::new(
            self.planner.horizon,
            (self.planner.sigma_linear, self.planner.sigma_angular),
        );
        self.last_diagnostics = None;
    }

    fn tick(&mut self, input: &TickInput<'_>) -> PolarAction {
        self.plan(input).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::baselines::{GoalSeekPolicy, IdlePolicy};
    use crate::bench::scenes::{make_scenes, SCENE_STEPS};
    use crate::scene::AgentTrack;
    use crate::DT;

    fn straight_scene() -> BenchScene {
        let mover = AgentTrack::new(
            1,
            (0..SCENE_STEPS)
                .map(|i| (i as f64 * DT, Vec2::new(0.25 * i as f64, 0.0)))
                .collect(),
        );
        make_scenes(&[mover], 3).scenes.remove(0)
    }

    #[test]
    fn goal_seeker_succeeds_in_empty_scene() {
        let scene = straight_scene();
        let kin = KinematicsConfig::default();
        let opts = EpisodeOptions::default();
        let mut policy = GoalSeekPolicy;
        let log = run_episode(&scene, &mut policy, &kin, &opts, 1, 0, 0);
        assert_eq!(log.outcome, Outcome::Success);
    }

    #[test]
    fn idle_times_out() {
        let scene = straight_scene();
        let kin = KinematicsConfig::default();
        let opts = EpisodeOptions::default();
        let mut policy = IdlePolicy;
        let log = run_episode(&scene, &mut policy, &kin, &opts, 1, 0, 0);
        assert_eq!(log.outcome, Outcome::Timeout);
        assert!((log.duration - opts.time_limit).abs() < 2.0 * DT);
    }

    #[test]
    fn driving_through_a_crowd_collides() {
        // A wall of stationary humans across the robot's straight path.
        let mover = AgentTrack::new(
            1,
            (0..SCENE_STEPS)
                .map(|i| (i as f64 * DT, Vec2::new(0.25 * i as f64, 0.0)))
                .collect(),
        );
        let mut tracks = vec![mover];
        for (k, y) in [-0.2_f64, -0.1, 0.0, 0.1, 0.2].iter().enumerate() {
            tracks.push(AgentTrack::new(
                10 + k as i64,
                (0..SCENE_STEPS)
                    .map(|i| (i as f64 * DT, Vec2::new(6.0, *y)))
                    .collect(),
            ));
        }
        let scene = make_scenes(&tracks, 3).scenes.remove(0);
        assert_eq!(scene.designated_id, 1);
        let kin = KinematicsConfig::default();
        let opts = EpisodeOptions::default();
        let mut policy = GoalSeekPolicy;
        let log = run_episode(&scene, &mut policy, &kin, &opts, 1, 0, 0);
        assert_eq!(log.outcome, Outcome::Collision);
        assert!(log.min_human_distance < opts.collision_radius);
    }

    #[test]
    fn executed_actions_respect_dynamic_window_on_replay() {
        let scene = straight_scene();
        let kin = KinematicsConfig::default();
        let opts = EpisodeOptions::default();
        let mut policy = GoalSeekPolicy;
        let log = run_episode(&scene, &mut policy, &kin, &opts, 1, 0, 0);
        // Replay: every logged command fits the window of its rolled
        // velocity state.
        let mut vel = (
            scene.robot_start.linear_velocity,
            scene.robot_start.angular_velocity,
        );
        for a in &log.commands {
            let win = crate::dynamics::velocity_window(vel, &kin, opts.dt);
            assert!(win.contains(*a), "{a:?} outside {win:?}");
            vel = (a.linear, a.angular);
        }
    }

    #[test]
    fn benchmark_aggregates_over_repeats() {
        let scene = straight_scene();
        let kin = KinematicsConfig::default();
        let opts = EpisodeOptions::default();
        let report = run_benchmark(
            &[scene],
            &|| Box::new(GoalSeekPolicy),
            3,
            &kin,
            &opts,
            42,
        );
        assert_eq!(report.episodes.len(), 3);
        assert_eq!(report.metrics.success, 100.0);
        assert_eq!(report.per_repeat.len(), 3);
    }
}
