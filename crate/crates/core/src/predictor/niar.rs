//! Inverse-autoregressive sampling: noise maps to an action sequence in one
//! pass, per-step parameters depend only on past noise, and every agent is
//! independent of the others.

use crate::error::{Error, Result};
use crate::predictor::net::{
    encoder_forward, encoder_input, head_forward, rnn_step, step_prefix, Params,
};
use crate::predictor::{AgentSeed, GaussianStep, LatentNoise, ModelKind, PredictorWeights};
use crate::scene::AgentHistory;
use crate::vec2::Vec2;
use crate::HORIZON;

/// One agent's NIAR trajectory: actions, the induced states, the per-step
/// conditionals they were drawn from, and the total action log-density.
#[derive(Debug, Clone)]
pub struct NiarAgentRollout {
    pub actions: Vec<Vec2>,
    /// States `s_1 .. s_T` induced by the additive transition.
    pub states: Vec<Vec2>,
    pub steps: Vec<GaussianStep>,
    pub log_density: f64,
}

impl NiarAgentRollout {
    pub fn final_state(&self) -> Vec2 {
        *self.states.last().expect("non-empty rollout")
    }
}

fn require_niar(weights: &PredictorWeights) -> Result<Params> {
    if weights.kind != ModelKind::Niar {
        return Err(Error::ModelKindMismatch {
            expected: "niar".into(),
            found: weights.kind.to_string(),
        });
    }
    Params::lift(weights)
}

/// Core affine-flow pass. In the forward direction (`actions == None`) the
/// action is `mean + std * z_t`; in the inverse direction the given expert
/// action determines `z_t = (action - mean) / std`. Either way the per-step
/// parameters only ever see noise from strictly earlier steps.
fn flow_pass(
    p: &Params,
    history: &AgentHistory,
    goal: Option<Vec2>,
    z_in: Option<&LatentNoise>,
    actions_in: Option<&[Vec2]>,
) -> NiarFlowResult {
    let goal = if p.goal_conditioned { goal } else { None };
    let x0 = encoder_input(history, goal);
    let (_, mut h) = encoder_forward(p, &x0);
    let start = history.current();
    let mut cur = start;
    let mut z_prev = [0.0, 0.0];

    let mut actions = Vec::with_capacity(HORIZON);
    let mut states = Vec::with_capacity(HORIZON);
    let mut steps = Vec::with_capacity(HORIZON);
    let mut zs = Vec::with_capacity(HORIZON);
    let mut log_density = 0.0;

    for t in 0..HORIZON {
        let prefix = step_prefix(cur, start, goal);
        let x = [prefix[0], prefix[1], prefix[2], prefix[3], z_prev[0], z_prev[1]];
        h = rnn_step(p, &x, &h);
        let raw = head_forward(p, &h);
        let step = GaussianStep::new(Vec2::new(raw[0], raw[1]), [raw[2], raw[3]]);
        let std = step.std();

        let (action, z) = match (z_in, actions_in) {
            (Some(zn), None) => {
                let z = zn.z[t];
                (
                    Vec2::new(step.mean.x + std[0] * z[0], step.mean.y + std[1] * z[1]),
                    z,
                )
            }
            (None, Some(acts)) => {
                let a = acts[t];
                (
                    a,
                    [(a.x - step.mean.x) / std[0], (a.y - step.mean.y) / std[1]],
                )
            }
            _ => unreachable!("exactly one of noise or actions must drive the flow"),
        };

        log_density += step.log_pdf(action);
        cur = crate::dynamics::human_step(cur, action);
        actions.push(action);
        states.push(cur);
        steps.push(step);
        zs.push(z);
        z_prev = z;
    }

    NiarFlowResult {
        rollout: NiarAgentRollout {
            actions,
            states,
            steps,
            log_density,
        },
        noise: LatentNoise { z: zs },
    }
}

struct NiarFlowResult {
    rollout: NiarAgentRollout,
    noise: LatentNoise,
}

/// Sample one agent's action sequence from latent noise in a single pass.
pub fn niar_rollout_agent(
    weights: &PredictorWeights,
    history: &AgentHistory,
    goal: Option<Vec2>,
    z: &LatentNoise,
) -> Result<NiarAgentRollout> {
    let p = require_niar(weights)?;
    z.check_len()?;
    Ok(flow_pass(&p, history, goal, Some(z), None).rollout)
}

/// As [`niar_rollout_agent`] over lifted parameters.
pub fn niar_rollout_agent_with(
    p: &Params,
    history: &AgentHistory,
    goal: Option<Vec2>,
    z: &LatentNoise,
) -> Result<NiarAgentRollout> {
    if p.kind != ModelKind::Niar {
        return Err(Error::ModelKindMismatch {
            expected: "niar".into(),
            found: p.kind.to_string(),
        });
    }
    z.check_len()?;
    Ok(flow_pass(p, history, goal, Some(z), None).rollout)
}

/// Multi-agent convenience: each agent is rolled out independently with its
/// own noise.
pub fn niar_rollout(
    weights: &PredictorWeights,
    seeds: &[AgentSeed],
    zs: &[LatentNoise],
) -> Result<Vec<NiarAgentRollout>> {
    if seeds.len() != zs.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} agents but {} noise tensors",
            seeds.len(),
            zs.len()
        )));
    }
    let p = require_niar(weights)?;
    seeds
        .iter()
        .zip(zs.iter())
        .map(|(s, z)| {
            z.check_len()?;
            Ok(flow_pass(&p, &s.history, s.goal, Some(z), None).rollout)
        })
        .collect()
}

/// Invert the flow: recover the latent noise that produces the given action
/// sequence and its log-density under the model.
pub fn niar_invert(
    weights: &PredictorWeights,
    history: &AgentHistory,
    goal: Option<Vec2>,
    actions: &[Vec2],
) -> Result<(LatentNoise, f64)> {
    let p = require_niar(weights)?;
    if actions.len() != HORIZON {
        return Err(Error::DimensionMismatch(format!(
            "{} actions, expected {HORIZON}",
            actions.len()
        )));
    }
    let res = flow_pass(&p, history, goal, None, Some(actions));
    Ok((res.noise, res.rollout.log_density))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictor::net::{HeadInit, NetConfig};
    use crate::seeding::rng_from_seed;

    fn small_weights(seed: u64) -> PredictorWeights {
        let cfg = NetConfig {
            enc_hidden: 10,
            soc_hidden: 6,
            rnn_hidden: 12,
        };
        PredictorWeights::init(ModelKind::Niar, true, &cfg, seed, HeadInit::Random)
    }

    fn history() -> AgentHistory {
        let pts: Vec<Vec2> = (0..8).map(|i| Vec2::new(0.3 * i as f64, 0.1)).collect();
        AgentHistory::from_recent(4, &pts)
    }

    #[test]
    fn zero_noise_yields_mean_trajectory() {
        let w = small_weights(2);
        let r = niar_rollout_agent(&w, &history(), Some(Vec2::new(6.0, 0.0)), &LatentNoise::zeros())
            .unwrap();
        for (a, s) in r.actions.iter().zip(r.steps.iter()) {
            assert!((*a - s.mean).norm() < 1e-15);
        }
    }

    #[test]
    fn agents_are_independent() {
        let w = small_weights(3);
        let z = LatentNoise::standard(&mut rng_from_seed(8));
        let seeds = vec![
            AgentSeed {
                id: 1,
                history: history(),
                goal: Some(Vec2::new(6.0, 0.0)),
            },
            AgentSeed {
                id: 2,
                history: history(),
                goal: Some(Vec2::new(6.0, 0.0)),
            },
        ];
        let rs = niar_rollout(&w, &seeds, &[z.clone(), z]).unwrap();
        assert_eq!(rs[0].actions, rs[1].actions);
    }

    #[test]
    fn log_density_matches_hand_recomputation() {
        let w = small_weights(5);
        let z = LatentNoise::standard(&mut rng_from_seed(21));
        let r = niar_rollout_agent(&w, &history(), Some(Vec2::new(-2.0, 4.0)), &z).unwrap();
        let mut expect = 0.0;
        for (a, s) in r.actions.iter().zip(r.steps.iter()) {
            for (x, m, ls) in [(a.x, s.mean.x, s.log_std[0]), (a.y, s.mean.y, s.log_std[1])] {
                let sd = ls.exp();
                expect += -((x - m) * (x - m)) / (2.0 * sd * sd)
                    - ls
                    - 0.5 * (2.0 * std::f64::consts::PI).ln();
            }
        }
        assert!((r.log_density - expect).abs() < 1e-9);
    }

    #[test]
    fn flow_inversion_roundtrip() {
        let w = small_weights(7);
        let z = LatentNoise::standard(&mut rng_from_seed(33));
        let goal = Some(Vec2::new(3.0, 3.0));
        let r = niar_rollout_agent(&w, &history(), goal, &z).unwrap();
        let (z_rec, ld) = niar_invert(&w, &history(), goal, &r.actions).unwrap();
        for (a, b) in z.z.iter().zip(z_rec.z.iter()) {
            assert!((a[0] - b[0]).abs() < 1e-9);
            assert!((a[1] - b[1]).abs() < 1e-9);
        }
        assert!((ld - r.log_density).abs() < 1e-9);
    }

    #[test]
    fn causality_perturbing_late_noise() {
        let w = small_weights(9);
        let goal = Some(Vec2::new(5.0, -1.0));
        let mut z = LatentNoise::standard(&mut rng_from_seed(13));
        let base = niar_rollout_agent(&w, &history(), goal, &z).unwrap();
        let t_perturb = 7;
        z.z[t_perturb][0] += 2.5;
        let pert = niar_rollout_agent(&w, &history(), goal, &z).unwrap();
        for t in 0..t_perturb {
            assert_eq!(base.actions[t], pert.actions[t], "action {t} changed");
        }
        assert_ne!(base.actions[t_perturb], pert.actions[t_perturb]);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let w = small_weights(1);
        let z = LatentNoise { z: vec![[0.0; 2]; 3] };
        assert!(niar_rollout_agent(&w, &history(), None, &z).is_err());
        assert!(niar_invert(&w, &history(), None, &[Vec2::ZERO; 4]).is_err());
    }

    #[test]
    fn kind_mismatch_rejected() {
        let cfg = NetConfig {
            enc_hidden: 8,
            soc_hidden: 6,
            rnn_hidden: 8,
        };
        let w = PredictorWeights::init(ModelKind::Nar, true, &cfg, 0, HeadInit::Zero);
        assert!(matches!(
            niar_rollout_agent(&w, &history(), None, &LatentNoise::zeros()),
            Err(Error::ModelKindMismatch { .. })
        ));
    }
}
