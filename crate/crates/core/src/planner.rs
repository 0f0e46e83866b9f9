//! Sampling-based model predictive control.
//!
//! Each tick draws `N_s` robot action sequences from a Gaussian plan policy,
//! clips them through the dynamic window, simulates the crowd's response
//! with the learned human policy, scores the episodes, and updates the plan
//! means — by exponentiated-return weighting (MPPI) or by elite refitting
//! (CEM). The previous solution warm-starts the next tick through a one-step
//! rolling shift.

use crate::dynamics::{dynamic_window_clip, robot_step, PolarAction};
use crate::error::{Error, Result};
use crate::predictor::{
    wide_rollout, AgentSeed, FastNet, GaussianStep, Params, RolloutMode, WideRobot,
};
use crate::rewards::{
    collision_reward, imitation_reward, map_reward, social_influence_reward, total_return,
    total_step_reward, RewardMap, RewardWeights,
};
use crate::scene::{clamp_goal, AgentHistory, Goal, GoalKind, KinematicsConfig, RobotState};
use crate::seeding::stream_rng;
use crate::vec2::Vec2;
use crate::HORIZON;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Per-timestep Gaussian over polar actions: the sampling policy the
/// optimizers refine.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPlanPolicy {
    pub means: Vec<PolarAction>,
    /// Per-step standard deviations (linear, angular).
    pub sigmas: Vec<(f64, f64)>,
}

impl GaussianPlanPolicy {
    pub fn new(horizon: usize, sigma: (f64, f64)) -> Self {
        GaussianPlanPolicy {
            means: vec![PolarAction::default(); horizon],
            sigmas: vec![sigma; horizon],
        }
    }

    pub fn horizon(&self) -> usize {
        self.means.len()
    }
}

/// Which optimizer refines the plan distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Mppi,
    Cem,
}

/// Planner settings. Defaults follow the benchmark configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerConfig {
    pub samples: usize,
    pub temperature: f64,
    pub horizon: usize,
    pub dt: f64,
    pub optimizer: OptimizerKind,
    pub cem_iterations: usize,
    pub cem_elite_fraction: f64,
    /// MPPI refinement iterations per tick; one is sufficient in practice.
    pub iterations: usize,
    pub sigma_linear: f64,
    pub sigma_angular: f64,
    /// Whether crowd responses are sampled or taken at the mean.
    pub stochastic_rollouts: bool,
    pub seed: u64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            samples: 800,
            temperature: 1.0,
            horizon: HORIZON,
            dt: crate::DT,
            optimizer: OptimizerKind::Mppi,
            cem_iterations: 3,
            cem_elite_fraction: 0.1,
            iterations: 1,
            sigma_linear: 0.3,
            sigma_angular: 0.6,
            stochastic_rollouts: true,
            seed: 0,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be >= 1".into()));
        }
        if self.temperature <= 0.0 {
            return Err(Error::InvalidConfig("temperature must be positive".into()));
        }
        if self.horizon != HORIZON {
            return Err(Error::InvalidConfig(format!(
                "horizon {} unsupported: predictor horizon is {HORIZON}",
                self.horizon
            )));
        }
        if !(self.cem_elite_fraction > 0.0 && self.cem_elite_fraction <= 1.0) {
            return Err(Error::InvalidConfig(
                "cem_elite_fraction must lie in (0, 1]".into(),
            ));
        }
        if self.dt <= 0.0 {
            return Err(Error::InvalidConfig("dt must be positive".into()));
        }
        Ok(())
    }

    pub fn rollout_mode(&self) -> RolloutMode {
        if self.stochastic_rollouts {
            RolloutMode::Sample
        } else {
            RolloutMode::Mean
        }
    }
}

/// One sampled robot plan with everything needed to audit its score.
#[derive(Debug, Clone)]
pub struct EpisodeRollout {
    /// Clipped polar actions actually simulated.
    pub actions: Vec<PolarAction>,
    /// Robot states `s^r_1 .. s^r_T`.
    pub robot_states: Vec<RobotState>,
    /// Robot step displacements (Cartesian actions).
    pub robot_cart: Vec<Vec2>,
    /// Human response states per step.
    pub human_states: Vec<Vec<Vec2>>,
    /// The robot-as-human conditionals used for the imitation signal.
    pub robot_gaussians: Vec<GaussianStep>,
    pub step_rewards: Vec<f64>,
    pub phi4: f64,
    pub return_value: f64,
}

/// One human the planner tracks: identity, history and forecast goal.
#[derive(Debug, Clone)]
pub struct PlannerHuman {
    pub id: i64,
    pub history: AgentHistory,
    pub goal: Vec2,
}

/// Everything a planner tick needs, in one (world) frame.
#[derive(Debug, Clone)]
pub struct PlanningInput<'a> {
    pub robot: RobotState,
    pub robot_history: AgentHistory,
    pub robot_goal: Vec2,
    pub humans: Vec<PlannerHuman>,
    pub map: &'a RewardMap,
    pub kinematics: &'a KinematicsConfig,
    pub rewards: &'a RewardWeights,
}

/// Optimizer diagnostics for one tick.
#[derive(Debug, Clone)]
pub struct TickDiagnostics {
    pub returns: Vec<f64>,
    pub weights: Vec<f64>,
    pub weights_entropy: f64,
    /// Log-mean-exp of temperature-scaled returns (the free-energy
    /// objective, reported but not directly optimized).
    pub free_energy: f64,
    pub best_index: usize,
    pub best: EpisodeRollout,
    /// Weight-averaged summed human final-state displacement caused by the
    /// candidate plans (the social-influence diagnostic).
    pub expected_human_displacement: f64,
}

/// Exponentiated-return weights: `softmax((R_n - max R) / gamma)`.
pub fn compute_weights(returns: &[f64], gamma: f64) -> Result<Vec<f64>> {
    if returns.is_empty() {
        return Err(Error::InvalidConfig("no returns to weight".into()));
    }
    if gamma <= 0.0 {
        return Err(Error::InvalidConfig("temperature must be positive".into()));
    }
    if returns.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonFinite("episode return".into()));
    }
    let upsilon = returns.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = returns.iter().map(|r| ((r - upsilon) / gamma).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

/// Mean update: `mu_t <- mu_t + sum_n w_n (a^n_t - mu_t)`, the weighted mean
/// of the sampled actions when the weights sum to one.
pub fn update_means(
    policy: &mut GaussianPlanPolicy,
    sampled_actions: &[Vec<PolarAction>],
    weights: &[f64],
) -> Result<()> {
    if sampled_actions.len() != weights.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} action sequences vs {} weights",
            sampled_actions.len(),
            weights.len()
        )));
    }
    for (n, seq) in sampled_actions.iter().enumerate() {
        if seq.len() != policy.horizon() {
            return Err(Error::DimensionMismatch(format!(
                "sample {n} has {} steps, policy horizon is {}",
                seq.len(),
                policy.horizon()
            )));
        }
    }
    // With weights summing to one, `mu + sum w (a - mu)` reduces to the
    // plain weighted mean; computing it directly keeps one-hot updates
    // bit-exact.
    for t in 0..policy.horizon() {
        let mut lin = 0.0;
        let mut ang = 0.0;
        for (seq, w) in sampled_actions.iter().zip(weights.iter()) {
            lin += w * seq[t].linear;
            ang += w * seq[t].angular;
        }
        policy.means[t] = PolarAction::new(lin, ang);
    }
    Ok(())
}

/// Warm-start shift: every mean moves one step earlier and the terminal
/// mean resets to zero.
pub fn rolling_operator(means: &[PolarAction]) -> Vec<PolarAction> {
    let mut out = Vec::with_capacity(means.len());
    out.extend_from_slice(&means[1..]);
    out.push(PolarAction::default());
    out
}

/// Draw one unclipped action sequence from the plan policy.
fn draw_actions<R: Rng>(policy: &GaussianPlanPolicy, rng: &mut R) -> Vec<PolarAction> {
    policy
        .means
        .iter()
        .zip(policy.sigmas.iter())
        .map(|(m, s)| {
            let zl: f64 = rng.sample(StandardNormal);
            let za: f64 = rng.sample(StandardNormal);
            PolarAction::new(m.linear + s.0 * zl, m.angular + s.1 * za)
        })
        .collect()
}

fn human_seeds(input: &PlanningInput<'_>) -> Vec<AgentSeed> {
    input
        .humans
        .iter()
        .map(|h| AgentSeed {
            id: h.id,
            history: h.history,
            goal: Some(h.goal),
        })
        .collect()
}

/// Shared unconditioned (robot-absent) mean forecast of human final states,
/// computed on the same engine the per-sample forecasts use.
fn unconditioned_finals(
    fast: &FastNet,
    seeds: &[AgentSeed],
    input: &PlanningInput<'_>,
) -> Vec<Vec2> {
    if seeds.is_empty() || input.rewards.lambda_social == 0.0 {
        return Vec::new();
    }
    let out = wide_rollout(fast, seeds, None, RolloutMode::Mean, 1, &[], false);
    out.finals.into_iter().next().unwrap_or_default()
}

/// One sampled plan before crowd simulation: clipped actions and the robot
/// states they induce.
struct PlanRoll {
    actions: Vec<PolarAction>,
    robot_states: Vec<RobotState>,
    robot_cart: Vec<Vec2>,
}

fn roll_plan(input: &PlanningInput<'_>, cfg: &PlannerConfig, raw: Vec<PolarAction>) -> PlanRoll {
    let mut actions = Vec::with_capacity(cfg.horizon);
    let mut robot_states = Vec::with_capacity(cfg.horizon);
    let mut robot_cart = Vec::with_capacity(cfg.horizon);
    let mut state = input.robot;
    let mut vel = (state.linear_velocity, state.angular_velocity);
    for a in raw {
        let clipped = dynamic_window_clip(a, vel, input.kinematics, cfg.dt);
        vel = (clipped.linear, clipped.angular);
        let (next, cart) = robot_step(&state, clipped, cfg.dt);
        state = next;
        actions.push(clipped);
        robot_states.push(state);
        robot_cart.push(cart.displacement);
    }
    PlanRoll {
        actions,
        robot_states,
        robot_cart,
    }
}

fn evaluate_batch(
    input: &PlanningInput<'_>,
    fast: &FastNet,
    cfg: &PlannerConfig,
    policy: &GaussianPlanPolicy,
    tick_seed: u64,
    iteration: u64,
    seeds: &[AgentSeed],
    uncond: &[Vec2],
) -> Result<Vec<EpisodeRollout>> {
    let n_samples = cfg.samples;
    let sample_seed =
        |n: usize| crate::seeding::derive(tick_seed, (iteration << 32) | n as u64);

    // Draw and roll every plan (cheap, sequential per sample).
    let plans: Vec<PlanRoll> = (0..n_samples)
        .map(|n| {
            let mut rng = stream_rng(sample_seed(n), 2);
            roll_plan(input, cfg, draw_actions(policy, &mut rng))
        })
        .collect();

    // Crowd responses run batched; chunking over workers cannot change any
    // per-sample value, so the reduction is a plain ordered concat.
    let chunk = n_samples.div_ceil(rayon::current_num_threads().max(1));
    let want_sir = !seeds.is_empty() && input.rewards.lambda_social != 0.0;
    let ranges: Vec<(usize, usize)> = (0..n_samples)
        .step_by(chunk.max(1))
        .map(|lo| (lo, (lo + chunk).min(n_samples)))
        .collect();

    let per_chunk: Vec<(crate::predictor::WideRolloutOut, Option<Vec<Vec<Vec2>>>)> = ranges
        .par_iter()
        .map(|(lo, hi)| {
            let b = hi - lo;
            let mut flat_plans = Vec::with_capacity(b * cfg.horizon);
            for p in &plans[*lo..*hi] {
                flat_plans.extend(p.robot_states.iter().map(|s| s.position));
            }
            let noise_seeds: Vec<u64> = (*lo..*hi)
                .map(|n| crate::seeding::derive(sample_seed(n), 0))
                .collect();
            let robot = WideRobot {
                history: &input.robot_history,
                goal: input.robot_goal,
                plans: &flat_plans,
            };
            let response = wide_rollout(
                fast,
                seeds,
                Some(&robot),
                cfg.rollout_mode(),
                b,
                &noise_seeds,
                true,
            );
            let mean_finals = if want_sir {
                let mean =
                    wide_rollout(fast, seeds, Some(&robot), RolloutMode::Mean, b, &[], false);
                Some(mean.finals)
            } else {
                None
            };
            (response, mean_finals)
        })
        .collect();

    let mut rollouts = Vec::with_capacity(n_samples);
    for ((lo, hi), (response, mean_finals)) in ranges.iter().zip(per_chunk) {
        for (i, n) in (*lo..*hi).enumerate() {
            let plan = &plans[n];
            let phi4 = match &mean_finals {
                Some(finals) => social_influence_reward(&finals[i], uncond)?,
                None => 0.0,
            };
            let mut step_rewards = Vec::with_capacity(cfg.horizon);
            for t in 0..cfg.horizon {
                let phi1 = map_reward(input.map, plan.robot_states[t].position);
                let phi2 = collision_reward(
                    plan.robot_states[t].position,
                    &response.human_states[i][t],
                    input.rewards.beta,
                    input.rewards.gamma_coll,
                );
                let phi3 = imitation_reward(plan.robot_cart[t], &response.robot_gauss[i][t]);
                step_rewards.push(total_step_reward(phi1, phi2, phi3, input.rewards));
            }
            let return_value = total_return(&step_rewards, phi4, input.rewards);
            rollouts.push(EpisodeRollout {
                actions: plan.actions.clone(),
                robot_states: plan.robot_states.clone(),
                robot_cart: plan.robot_cart.clone(),
                human_states: response.human_states[i].clone(),
                robot_gaussians: response.robot_gauss[i].clone(),
                step_rewards,
                phi4,
                return_value,
            });
        }
        let _ = hi;
    }
    Ok(rollouts)
}

fn diagnostics_from(rollouts: Vec<EpisodeRollout>, weights: Vec<f64>) -> TickDiagnostics {
    let returns: Vec<f64> = rollouts.iter().map(|r| r.return_value).collect();
    let mut best_index = 0;
    for (i, r) in returns.iter().enumerate() {
        if *r > returns[best_index] {
            best_index = i;
        }
    }
    let entropy = -weights
        .iter()
        .filter(|w| **w > 0.0)
        .map(|w| w * w.ln())
        .sum::<f64>();
    let expected_human_displacement = rollouts
        .iter()
        .zip(weights.iter())
        .map(|(r, w)| w * (-r.phi4))
        .sum::<f64>();
    let best = rollouts
        .into_iter()
        .nth(best_index)
        .expect("non-empty batch");
    TickDiagnostics {
        free_energy: 0.0,
        returns,
        weights,
        weights_entropy: entropy,
        best_index,
        best,
        expected_human_displacement,
    }
}

fn free_energy(returns: &[f64], gamma: f64) -> f64 {
    let upsilon = returns.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mean_exp: f64 =
        returns.iter().map(|r| ((r - upsilon) / gamma).exp()).sum::<f64>() / returns.len() as f64;
    upsilon / gamma + mean_exp.ln()
}

/// One MPPI tick: sample, simulate, weight, update the means, emit the
/// first mean as the command and roll the policy for the next tick.
pub fn mppi_step(
    input: &PlanningInput<'_>,
    policy: &mut GaussianPlanPolicy,
    predictor: &Params,
    cfg: &PlannerConfig,
    tick_seed: u64,
) -> Result<(PolarAction, TickDiagnostics)> {
    cfg.validate()?;
    if policy.horizon() != cfg.horizon {
        return Err(Error::DimensionMismatch(format!(
            "policy horizon {} vs config horizon {}",
            policy.horizon(),
            cfg.horizon
        )));
    }
    let fast = FastNet::new(predictor);
    let seeds = human_seeds(input);
    let uncond = unconditioned_finals(&fast, &seeds, input);

    let mut diag = None;
    for iter in 0..cfg.iterations.max(1) {
        let rollouts = evaluate_batch(
            input, &fast, cfg, policy, tick_seed, iter as u64, &seeds, &uncond,
        )?;
        let returns: Vec<f64> = rollouts.iter().map(|r| r.return_value).collect();
        let weights = compute_weights(&returns, cfg.temperature)?;
        let actions: Vec<Vec<PolarAction>> = rollouts.iter().map(|r| r.actions.clone()).collect();
        update_means(policy, &actions, &weights)?;
        let fe = free_energy(&returns, cfg.temperature);
        let mut d = diagnostics_from(rollouts, weights);
        d.free_energy = fe;
        diag = Some(d);
    }

    // The weighted mean is feasible when all samples share one window, but
    // per-sample windows drift with their rolled-forward velocities, so the
    // emitted command re-clips against the live velocity.
    let command = dynamic_window_clip(
        policy.means[0],
        (input.robot.linear_velocity, input.robot.angular_velocity),
        input.kinematics,
        cfg.dt,
    );
    policy.means = rolling_operator(&policy.means);
    Ok((command, diag.expect("at least one iteration")))
}

/// One CEM tick: iterate sample/evaluate/refit on the elite set, emit the
/// first mean, then roll. Sigmas restart from the configured values each
/// tick and refit to the elite standard deviation (floored to avoid
/// collapse) between iterations.
pub fn cem_step(
    input: &PlanningInput<'_>,
    policy: &mut GaussianPlanPolicy,
    predictor: &Params,
    cfg: &PlannerConfig,
    tick_seed: u64,
) -> Result<(PolarAction, TickDiagnostics)> {
    cfg.validate()?;
    if policy.horizon() != cfg.horizon {
        return Err(Error::DimensionMismatch(format!(
            "policy horizon {} vs config horizon {}",
            policy.horizon(),
            cfg.horizon
        )));
    }
    const SIGMA_FLOOR: f64 = 0.05;
    policy.sigmas = vec![(cfg.sigma_linear, cfg.sigma_angular); cfg.horizon];
    let fast = FastNet::new(predictor);
    let seeds = human_seeds(input);
    let uncond = unconditioned_finals(&fast, &seeds, input);
    let elite_count =
        ((cfg.cem_elite_fraction * cfg.samples as f64).ceil() as usize).clamp(1, cfg.samples);

    let mut diag = None;
    for iter in 0..cfg.cem_iterations.max(1) {
        let rollouts = evaluate_batch(
            input, &fast, cfg, policy, tick_seed, iter as u64, &seeds, &uncond,
        )?;
        let returns: Vec<f64> = rollouts.iter().map(|r| r.return_value).collect();
        if returns.iter().any(|r| !r.is_finite()) {
            return Err(Error::NonFinite("episode return".into()));
        }
        let mut order: Vec<usize> = (0..returns.len()).collect();
        order.sort_by(|a, b| {
            returns[*b]
                .partial_cmp(&returns[*a])
                .unwrap()
                .then(a.cmp(b))
        });
        let elite: Vec<usize> = order[..elite_count].to_vec();

        for t in 0..cfg.horizon {
            let mut mean = (0.0, 0.0);
            for &n in &elite {
                mean.0 += rollouts[n].actions[t].linear;
                mean.1 += rollouts[n].actions[t].angular;
            }
            mean.0 /= elite_count as f64;
            mean.1 /= elite_count as f64;
            let mut var = (0.0, 0.0);
            for &n in &elite {
                var.0 += (rollouts[n].actions[t].linear - mean.0).powi(2);
                var.1 += (rollouts[n].actions[t].angular - mean.1).powi(2);
            }
            var.0 /= elite_count as f64;
            var.1 /= elite_count as f64;
            policy.means[t] = PolarAction::new(mean.0, mean.1);
            policy.sigmas[t] = (var.0.sqrt().max(SIGMA_FLOOR), var.1.sqrt().max(SIGMA_FLOOR));
        }

        // Uniform weights over the elite set for diagnostics.
        let mut weights = vec![0.0; returns.len()];
        for &n in &elite {
            weights[n] = 1.0 / elite_count as f64;
        }
        let fe = free_energy(&returns, cfg.temperature);
        let mut d = diagnostics_from(rollouts, weights);
        d.free_energy = fe;
        diag = Some(d);
    }

    let command = dynamic_window_clip(
        policy.means[0],
        (input.robot.linear_velocity, input.robot.angular_velocity),
        input.kinematics,
        cfg.dt,
    );
    policy.means = rolling_operator(&policy.means);
    Ok((command, diag.expect("at least one iteration")))
}

/// Velocity-adaptive sub-goal: walk the global path a speed-dependent
/// look-ahead distance beyond the closest path point, then clamp into the
/// admissible goal band around the robot.
pub fn select_subgoal(global_path: &[Vec2], robot: &RobotState, horizon: usize, dt: f64) -> Goal {
    assert!(!global_path.is_empty(), "global path must be non-empty");
    let lookahead = (robot.linear_velocity.abs() * horizon as f64 * dt)
        .clamp(crate::scene::GOAL_MIN_DIST, crate::scene::GOAL_MAX_DIST);

    // Closest point on the polyline (projected onto segments).
    let mut best = (f64::INFINITY, 0usize, 0.0f64);
    for i in 0..global_path.len().saturating_sub(1) {
        let a = global_path[i];
        let b = global_path[i + 1];
        let ab = b - a;
        let len_sq = ab.norm_sq();
        let t = if len_sq > 0.0 {
            ((robot.position - a).dot(ab) / len_sq).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let proj = a + ab * t;
        let d = proj.dist(robot.position);
        if d < best.0 {
            best = (d, i, t);
        }
    }

    // Walk the remaining arc length from the closest point.
    let mut remaining = lookahead;
    let mut point;
    let mut seg;
    if global_path.len() == 1 {
        point = global_path[0];
        seg = 0;
    } else {
        seg = best.1;
        point = global_path[seg] + (global_path[seg + 1] - global_path[seg]) * best.2;
    }
    while seg + 1 < global_path.len() {
        let seg_end = global_path[seg + 1];
        let avail = point.dist(seg_end);
        if avail >= remaining {
            if avail > 0.0 {
                point = point + (seg_end - point) * (remaining / avail);
            }
            break;
        }
        remaining -= avail;
        seg += 1;
        point = seg_end;
    }

    Goal {
        position: clamp_goal(point - robot.position),
        kind: GoalKind::RobotGoal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_uniform_for_equal_returns() {
        let w = compute_weights(&[-1.0, -1.0, -1.0], 1.0).unwrap();
        for x in &w {
            assert!((x - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn weights_softmax_example() {
        let w = compute_weights(&[0.0, -1.0], 1.0).unwrap();
        assert!((w[0] - 0.7310585786300049).abs() < 1e-4);
        assert!((w[1] - 0.2689414213699951).abs() < 1e-4);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weights_shift_invariant() {
        let a = compute_weights(&[0.0, -1.0], 1.0).unwrap();
        let b = compute_weights(&[-1e6, -1e6 - 1.0], 1.0).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn weights_reject_non_finite() {
        assert!(compute_weights(&[f64::NAN, 0.0], 1.0).is_err());
        assert!(compute_weights(&[f64::INFINITY], 1.0).is_err());
    }

    #[test]
    fn weights_preserve_return_ordering() {
        let returns = [-3.0, 1.0, -0.5, 0.99];
        let w = compute_weights(&returns, 0.7).unwrap();
        for i in 0..returns.len() {
            for j in 0..returns.len() {
                if returns[i] > returns[j] {
                    assert!(w[i] > w[j]);
                }
            }
        }
    }

    fn seq(v: &[(f64, f64)]) -> Vec<PolarAction> {
        v.iter().map(|(l, a)| PolarAction::new(*l, *a)).collect()
    }

    #[test]
    fn update_means_one_hot_reproduces_sample() {
        let mut p = GaussianPlanPolicy::new(3, (0.3, 0.6));
        p.means = seq(&[(0.5, 0.1), (0.2, -0.2), (0.0, 0.0)]);
        let s0 = seq(&[(0.1, 0.0), (0.3, 0.3), (0.7, -0.1)]);
        let s1 = seq(&[(0.9, 0.5), (0.4, 0.1), (0.2, 0.2)]);
        update_means(&mut p, &[s0, s1.clone()], &[0.0, 1.0]).unwrap();
        assert_eq!(p.means, s1);
    }

    #[test]
    fn update_means_weighted_example() {
        let mut p = GaussianPlanPolicy::new(1, (0.3, 0.6));
        let w = compute_weights(&[0.0, -1.0], 1.0).unwrap();
        update_means(&mut p, &[seq(&[(0.2, 0.0)]), seq(&[(0.0, 0.0)])], &w).unwrap();
        assert!((p.means[0].linear - 0.14621171572600097).abs() < 1e-4);
        assert!(p.means[0].angular.abs() < 1e-12);
    }

    #[test]
    fn update_means_equal_weights_is_arithmetic_mean() {
        let mut p = GaussianPlanPolicy::new(1, (0.3, 0.6));
        update_means(
            &mut p,
            &[seq(&[(0.4, 0.2)]), seq(&[(0.0, -0.2)])],
            &[0.5, 0.5],
        )
        .unwrap();
        assert!((p.means[0].linear - 0.2).abs() < 1e-12);
        assert!(p.means[0].angular.abs() < 1e-12);
    }

    #[test]
    fn rolling_shifts_and_zeroes() {
        let m = seq(&[(1.0, 0.1), (2.0, 0.2), (3.0, 0.3)]);
        let rolled = rolling_operator(&m);
        assert_eq!(rolled, seq(&[(2.0, 0.2), (3.0, 0.3), (0.0, 0.0)]));
        let zeros = seq(&[(0.0, 0.0); 3]);
        assert_eq!(rolling_operator(&zeros), zeros);
        let mut cur = m;
        for _ in 0..3 {
            cur = rolling_operator(&cur);
        }
        assert_eq!(cur, seq(&[(0.0, 0.0); 3]));
    }

    #[test]
    fn subgoal_examples() {
        let path: Vec<Vec2> = (0..21).map(|i| Vec2::new(i as f64, 0.0)).collect();
        let robot = RobotState::new(Vec2::ZERO, 0.0, 0.7, 0.0);
        let g = select_subgoal(&path, &robot, 12, 0.4);
        assert!((g.position.x - 3.36).abs() < 1e-9);
        assert!(g.position.y.abs() < 1e-12);

        let stopped = RobotState::new(Vec2::ZERO, 0.0, 0.0, 0.0);
        let g = select_subgoal(&path, &stopped, 12, 0.4);
        assert!((g.position.x - 3.0).abs() < 1e-12);

        let short: Vec<Vec2> = vec![Vec2::ZERO, Vec2::new(1.0, 0.0)];
        let g = select_subgoal(&short, &stopped, 12, 0.4);
        // Path ends before the look-ahead: endpoint, clamped out to 3 m.
        assert!((g.position.x - 3.0).abs() < 1e-12);
    }

    #[test]
    fn subgoal_starts_from_closest_point() {
        let path: Vec<Vec2> = (0..30).map(|i| Vec2::new(i as f64 * 0.5, 2.0)).collect();
        let robot = RobotState::new(Vec2::new(5.0, 0.0), 0.0, 0.0, 0.0);
        let g = select_subgoal(&path, &robot, 12, 0.4);
        // Closest path point is (5, 2); 3 m ahead along +x is (8, 2).
        let world = g.position + robot.position;
        assert!((world.x - 8.0).abs() < 1e-9);
        assert!((world.y - 2.0).abs() < 1e-9);
    }
}
