//! Goal-conditioned generative models of human actions.
//!
//! Two model kinds share one compact architecture family:
//!
//! - **NAR** (neural autoregressive): a per-step diagonal Gaussian over the
//!   next action, conditioned on every agent's states up to the current step
//!   and the agent's own goal. Rollouts are sequential; social context enters
//!   through a max-pooled neighbor embedding at every step.
//! - **NIAR** (neural inverse autoregressive): an affine flow mapping i.i.d.
//!   standard-normal noise to an action sequence. Per-step parameters depend
//!   only on past noise, so sampling needs one pass and the conditionals are
//!   independent of other agents.
//!
//! Training maximizes the likelihood of expert actions from hindsight-
//! relabeled windows, with an optional pairwise collision penalty, through a
//! hand-written backward pass validated by finite differences.

mod fast;
mod her;
mod io;
mod nar;
mod net;
mod niar;
mod train;

pub use her::build_her_windows;
pub use nar::{
    nar_conditional, nar_conditional_with, nar_conditioned_rollout,
    nar_conditioned_rollout_with, AgentSeed, NarRollout, RobotPlanInput, RolloutMode,
};
pub use fast::{tanh_fast, wide_rollout, FastNet, WideRobot, WideRolloutOut};
pub use net::{HeadInit, NetConfig, Params};
pub use niar::{
    niar_invert, niar_rollout, niar_rollout_agent, niar_rollout_agent_with, NiarAgentRollout,
};
pub use train::{
    batch_loss, check_gradients, check_gradients_corrupted, train_mle, TrainHyper, TrainResult,
};

use crate::error::{Error, Result};
use crate::scene::AgentHistory;
use crate::vec2::Vec2;
use crate::HORIZON;
use rand::Rng;
use rand_distr::StandardNormal;

/// Log-std clamp band for every Gaussian head output.
pub const LOG_STD_MIN: f64 = -4.0;
pub const LOG_STD_MAX: f64 = 2.0;

/// Diagonal Gaussian over one 2-D action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianStep {
    pub mean: Vec2,
    pub log_std: [f64; 2],
}

impl GaussianStep {
    /// Construct with the log-std clamped into `[LOG_STD_MIN, LOG_STD_MAX]`.
    pub fn new(mean: Vec2, log_std: [f64; 2]) -> Self {
        GaussianStep {
            mean,
            log_std: [
                log_std[0].clamp(LOG_STD_MIN, LOG_STD_MAX),
                log_std[1].clamp(LOG_STD_MIN, LOG_STD_MAX),
            ],
        }
    }

    pub fn std(&self) -> [f64; 2] {
        [self.log_std[0].exp(), self.log_std[1].exp()]
    }

    /// Log-density of an action, summed over both dimensions.
    pub fn log_pdf(&self, action: Vec2) -> f64 {
        let a = [action.x, action.y];
        let m = [self.mean.x, self.mean.y];
        let mut lp = 0.0;
        for d in 0..2 {
            let z = (a[d] - m[d]) * (-self.log_std[d]).exp();
            lp += -0.5 * z * z - self.log_std[d] - 0.5 * crate::rewards::LOG_2PI;
        }
        lp
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec2 {
        let s = self.std();
        let zx: f64 = rng.sample(StandardNormal);
        let zy: f64 = rng.sample(StandardNormal);
        Vec2::new(self.mean.x + s[0] * zx, self.mean.y + s[1] * zy)
    }
}

/// Which generative model a weight set parameterizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Nar,
    Niar,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Nar => "nar",
            ModelKind::Niar => "niar",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One named dense tensor with shape metadata. Values are stored as `f32`,
/// matching the on-disk format; computation lifts them to `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f32>,
}

impl Tensor {
    pub fn zeros(name: &str, rows: usize, cols: usize) -> Self {
        Tensor {
            name: name.to_string(),
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// All learnable parameters of one compact network, plus its kind tag and
/// goal-conditioning flag. The tensor order is fixed by the architecture.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorWeights {
    pub kind: ModelKind,
    pub goal_conditioned: bool,
    pub tensors: Vec<Tensor>,
}

impl PredictorWeights {
    /// Total number of scalar parameters.
    pub fn param_count(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    pub fn get_flat(&self, mut idx: usize) -> f32 {
        for t in &self.tensors {
            if idx < t.len() {
                return t.data[idx];
            }
            idx -= t.len();
        }
        panic!("flat index out of range");
    }

    pub fn set_flat(&mut self, mut idx: usize, value: f32) {
        for t in &mut self.tensors {
            if idx < t.len() {
                t.data[idx] = value;
                return;
            }
            idx -= t.len();
        }
        panic!("flat index out of range");
    }

    pub fn all_finite(&self) -> bool {
        self.tensors
            .iter()
            .all(|t| t.data.iter().all(|v| v.is_finite()))
    }
}

/// Standard-normal noise driving one NIAR agent rollout: `HORIZON` i.i.d.
/// 2-D draws.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentNoise {
    pub z: Vec<[f64; 2]>,
}

impl LatentNoise {
    pub fn standard<R: Rng>(rng: &mut R) -> Self {
        let z = (0..HORIZON)
            .map(|_| [rng.sample(StandardNormal), rng.sample(StandardNormal)])
            .collect();
        LatentNoise { z }
    }

    pub fn zeros() -> Self {
        LatentNoise {
            z: vec![[0.0, 0.0]; HORIZON],
        }
    }

    pub fn check_len(&self) -> Result<()> {
        if self.z.len() != HORIZON {
            return Err(Error::DimensionMismatch(format!(
                "latent noise has {} steps, expected {}",
                self.z.len(),
                HORIZON
            )));
        }
        Ok(())
    }
}

/// Hindsight-relabeled training window: per predicted agent, an 8-step
/// observation, 12 expert actions/states and the final state relabeled as
/// the goal. Context agents are inputs only, never prediction targets.
#[derive(Debug, Clone, PartialEq)]
pub struct HerWindow {
    /// Global grid index of the current-time step (last observed step).
    pub anchor: i64,
    pub agents: Vec<HerAgent>,
    pub context: Vec<HerContext>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HerAgent {
    pub agent_id: i64,
    pub history: AgentHistory,
    /// Expert actions: exact first differences of the expert states.
    pub actions: [Vec2; HORIZON],
    /// Expert states after the anchor, `s*_1 .. s*_T`.
    pub states: [Vec2; HORIZON],
    /// Relabeled goal: the state at the final step.
    pub goal: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HerContext {
    pub agent_id: i64,
    pub history: AgentHistory,
    /// Ground-truth future positions where the agent is still present.
    pub future: [Option<Vec2>; HORIZON],
}

/// Serialize/deserialize entry points live in `io`.
pub use io::{load_weights, save_weights, WEIGHTS_FORMAT_VERSION};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng_from_seed;

    #[test]
    fn gaussian_log_pdf_matches_direct_formula() {
        let g = GaussianStep::new(Vec2::new(0.1, -0.2), [0.3, -0.5]);
        let a = Vec2::new(0.4, 0.1);
        let mut expect = 0.0;
        for (x, m, ls) in [(a.x, 0.1, 0.3), (a.y, -0.2, -0.5)] {
            let s = f64::exp(ls);
            expect += -((x - m) * (x - m)) / (2.0 * s * s) - ls - 0.5 * (2.0 * std::f64::consts::PI).ln();
        }
        assert!((g.log_pdf(a) - expect).abs() < 1e-12);
    }

    #[test]
    fn gaussian_clamps_log_std() {
        let g = GaussianStep::new(Vec2::ZERO, [-10.0, 10.0]);
        assert_eq!(g.log_std, [LOG_STD_MIN, LOG_STD_MAX]);
    }

    #[test]
    fn latent_noise_shape() {
        let mut rng = rng_from_seed(1);
        let z = LatentNoise::standard(&mut rng);
        assert_eq!(z.z.len(), HORIZON);
        z.check_len().unwrap();
        assert!(LatentNoise { z: vec![[0.0; 2]; 3] }.check_len().is_err());
    }
}
