//! Autoregressive inference: per-step conditionals and crowd rollouts with
//! the robot's states substituted from a candidate plan (best-response
//! evaluation).

use crate::error::{Error, Result};
use crate::predictor::net::{
    encoder_forward, encoder_input, head_forward, max_pool, rnn_step, social_forward,
    social_pair_input, step_prefix, velocity_of, Params,
};
use crate::predictor::{GaussianStep, ModelKind, PredictorWeights};
use crate::scene::{nearest_within, AgentHistory};
use crate::seeding::rng_from_seed;
use crate::vec2::Vec2;
use crate::{DT, HORIZON, ROBOT_ID};
use rand_chacha::ChaCha8Rng;

/// One agent entering a joint rollout: its identity, observed history and
/// (optional) goal. A `None` goal, or a goal-unconditioned weight set,
/// zeroes the goal inputs.
#[derive(Debug, Clone)]
pub struct AgentSeed {
    pub id: i64,
    pub history: AgentHistory,
    pub goal: Option<Vec2>,
}

/// Whether rollouts take the per-step mean or draw from the Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RolloutMode {
    Mean,
    Sample,
}

/// The robot's side of a conditioned rollout: its own history and goal (it
/// is modeled as one more human for the imitation signal) and the planned
/// future positions `s^r_1 .. s^r_T` that replace its model-generated
/// states.
#[derive(Debug, Clone, Copy)]
pub struct RobotPlanInput<'a> {
    pub history: &'a AgentHistory,
    pub goal: Vec2,
    pub plan: &'a [Vec2],
}

/// Result of a conditioned rollout.
#[derive(Debug, Clone)]
pub struct NarRollout {
    /// Human positions per step: `human_states[t][i]` is agent `i` at step
    /// `t + 1`.
    pub human_states: Vec<Vec<Vec2>>,
    /// The Gaussian each human action was taken from.
    pub human_steps: Vec<Vec<GaussianStep>>,
    /// The robot-as-human conditional at every step (empty without a robot).
    pub robot_steps: Vec<GaussianStep>,
}

impl NarRollout {
    /// Final predicted human positions.
    pub fn finals(&self) -> Vec<Vec2> {
        self.human_states.last().cloned().unwrap_or_default()
    }
}

/// Joint autoregressive state over a set of agents.
pub(crate) struct JointState {
    ids: Vec<i64>,
    hidden: Vec<Vec<f64>>,
    start: Vec<Vec2>,
    prev: Vec<Vec2>,
    cur: Vec<Vec2>,
    goals: Vec<Option<Vec2>>,
}

impl JointState {
    pub(crate) fn init(p: &Params, seeds: &[AgentSeed]) -> JointState {
        let mut js = JointState {
            ids: Vec::with_capacity(seeds.len()),
            hidden: Vec::with_capacity(seeds.len()),
            start: Vec::with_capacity(seeds.len()),
            prev: Vec::with_capacity(seeds.len()),
            cur: Vec::with_capacity(seeds.len()),
            goals: Vec::with_capacity(seeds.len()),
        };
        for s in seeds {
            let goal = if p.goal_conditioned { s.goal } else { None };
            let x = encoder_input(&s.history, goal);
            let (_, h0) = encoder_forward(p, &x);
            let cur = s.history.current();
            js.ids.push(s.id);
            js.hidden.push(h0);
            js.start.push(cur);
            js.prev.push(cur - s.history.last_velocity() * DT);
            js.cur.push(cur);
            js.goals.push(goal);
        }
        js
    }

    /// Advance every agent's conditional one step from the current joint
    /// positions, returning the per-agent Gaussians. Hidden states update in
    /// place; positions do not move until [`JointState::advance`].
    pub(crate) fn step(&mut self, p: &Params) -> Vec<GaussianStep> {
        let n = self.ids.len();
        let vels: Vec<Vec2> = (0..n).map(|i| velocity_of(self.cur[i], self.prev[i])).collect();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let others: Vec<(i64, Vec2)> = (0..n)
                .filter(|j| *j != i)
                .map(|j| (self.ids[j], self.cur[j]))
                .collect();
            let neighbor_ids = nearest_within(self.cur[i], &others, None);
            let embeddings: Vec<Vec<f64>> = neighbor_ids
                .iter()
                .map(|id| {
                    let j = self.ids.iter().position(|x| x == id).unwrap();
                    let u = social_pair_input(self.cur[i], vels[i], self.cur[j], vels[j]);
                    social_forward(p, &u).1
                })
                .collect();
            let (pooled, _) = max_pool(&embeddings, p.cfg.soc_hidden);
            let prefix = step_prefix(self.cur[i], self.start[i], self.goals[i]);
            let mut x = Vec::with_capacity(4 + p.cfg.soc_hidden);
            x.extend_from_slice(&prefix);
            x.extend_from_slice(&pooled);
            let h = rnn_step(p, &x, &self.hidden[i]);
            let raw = head_forward(p, &h);
            self.hidden[i] = h;
            out.push(GaussianStep::new(
                Vec2::new(raw[0], raw[1]),
                [raw[2], raw[3]],
            ));
        }
        out
    }

    pub(crate) fn advance(&mut self, next: &[Vec2]) {
        debug_assert_eq!(next.len(), self.cur.len());
        self.prev = std::mem::replace(&mut self.cur, next.to_vec());
    }
}

fn require_nar(weights: &PredictorWeights) -> Result<Params> {
    if weights.kind != ModelKind::Nar {
        return Err(Error::ModelKindMismatch {
            expected: "nar".into(),
            found: weights.kind.to_string(),
        });
    }
    Params::lift(weights)
}

/// The Gaussian over each agent's next action, conditioned on every agent's
/// states up to the present. `future_frames` extends the observation with
/// already-known joint positions (newest last); each frame must carry every
/// seeded agent.
pub fn nar_conditional(
    weights: &PredictorWeights,
    seeds: &[AgentSeed],
    future_frames: &[Vec<(i64, Vec2)>],
) -> Result<Vec<GaussianStep>> {
    let p = require_nar(weights)?;
    nar_conditional_with(&p, seeds, future_frames)
}

/// As [`nar_conditional`], over already-lifted parameters.
pub fn nar_conditional_with(
    p: &Params,
    seeds: &[AgentSeed],
    future_frames: &[Vec<(i64, Vec2)>],
) -> Result<Vec<GaussianStep>> {
    let mut js = JointState::init(p, seeds);
    for frame in future_frames {
        // Evolve the hidden states along the given joint history.
        let _ = js.step(p);
        let next: Result<Vec<Vec2>> = js
            .ids
            .iter()
            .map(|id| {
                frame
                    .iter()
                    .find(|(fid, _)| fid == id)
                    .map(|(_, pos)| *pos)
                    .ok_or_else(|| {
                        Error::DimensionMismatch(format!("agent {id} missing from future frame"))
                    })
            })
            .collect();
        js.advance(&next?);
    }
    Ok(js.step(p))
}

/// Roll the crowd forward over the horizon, substituting the robot's states
/// from a candidate plan at every step. Humans move by their sampled (or
/// mean) actions through the additive transition; the robot's conditional is
/// still evaluated at each step so the plan can be scored for human
/// likeness.
pub fn nar_conditioned_rollout(
    weights: &PredictorWeights,
    humans: &[AgentSeed],
    robot: Option<RobotPlanInput<'_>>,
    mode: RolloutMode,
    seed: u64,
) -> Result<NarRollout> {
    let p = require_nar(weights)?;
    let mut rng = rng_from_seed(seed);
    nar_conditioned_rollout_with(&p, humans, robot, mode, &mut rng)
}

/// As [`nar_conditioned_rollout`], over lifted parameters and a caller
/// rng stream (the planner derives one stream per sample).
pub fn nar_conditioned_rollout_with(
    p: &Params,
    humans: &[AgentSeed],
    robot: Option<RobotPlanInput<'_>>,
    mode: RolloutMode,
    rng: &mut ChaCha8Rng,
) -> Result<NarRollout> {
    if p.kind != ModelKind::Nar {
        return Err(Error::ModelKindMismatch {
            expected: "nar".into(),
            found: p.kind.to_string(),
        });
    }
    if let Some(r) = &robot {
        if r.plan.len() != HORIZON {
            return Err(Error::DimensionMismatch(format!(
                "robot plan has {} steps, expected {HORIZON}",
                r.plan.len()
            )));
        }
    }
    let n_humans = humans.len();
    if n_humans == 0 && robot.is_none() {
        return Ok(NarRollout {
            human_states: vec![vec![]; HORIZON],
            human_steps: vec![vec![]; HORIZON],
            robot_steps: vec![],
        });
    }

    let mut seeds: Vec<AgentSeed> = humans.to_vec();
    if let Some(r) = &robot {
        seeds.push(AgentSeed {
            id: ROBOT_ID,
            history: *r.history,
            goal: Some(r.goal),
        });
    }

    let mut js = JointState::init(p, &seeds);
    let mut human_states = Vec::with_capacity(HORIZON);
    let mut human_steps = Vec::with_capacity(HORIZON);
    let mut robot_steps = Vec::with_capacity(HORIZON);

    for t in 0..HORIZON {
        let gauss = js.step(p);
        let mut next = Vec::with_capacity(seeds.len());
        let mut step_states = Vec::with_capacity(n_humans);
        for i in 0..n_humans {
            let action = match mode {
                RolloutMode::Mean => gauss[i].mean,
                RolloutMode::Sample => gauss[i].sample(rng),
            };
            let pos = crate::dynamics::human_step(js.cur[i], action);
            next.push(pos);
            step_states.push(pos);
        }
        if let Some(r) = &robot {
            robot_steps.push(gauss[n_humans]);
            next.push(r.plan[t]);
        }
        js.advance(&next);
        human_states.push(step_states);
        human_steps.push(gauss[..n_humans].to_vec());
    }

    Ok(NarRollout {
        human_states,
        human_steps,
        robot_steps,
    })
}
