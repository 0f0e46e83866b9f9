//! Crowd navigation via sampling-based model predictive control.
//!
//! The crate plans unicycle-robot motion through pedestrian crowds by scoring
//! sampled robot plans against a learned goal-conditioned generative model of
//! human motion. It contains the full pipeline:
//!
//! - [`scene`]: shared domain types, frame normalization, neighbor selection
//!   and goal clamping.
//! - [`dynamics`]: robot/human transition functions and dynamic-window action
//!   clipping.
//! - [`predictor`]: autoregressive (NAR) and inverse-autoregressive (NIAR)
//!   human action models, hindsight-relabeled dataset construction and
//!   maximum-likelihood training with a hand-written backward pass.
//! - [`rewards`]: map, collision, imitation and social-influence reward
//!   signals and their weighted sum.
//! - [`planner`]: MPPI and CEM optimizers over sampled action sequences,
//!   warm-start rolling and velocity-adaptive sub-goal selection.
//! - [`goal_forecast`]: per-human goal forecasting by scoring NIAR samples
//!   against the reward map.
//! - [`bench`]: trajectory-file ingestion, scene construction, the benchmark
//!   protocol, metrics, and DWA / GCBC / constant-velocity baselines.

pub mod bench;
pub mod dynamics;
pub mod error;
pub mod goal_forecast;
pub mod planner;
pub mod predictor;
pub mod rewards;
pub mod scene;
pub mod seeding;
pub mod vec2;

pub use error::Error;
pub use vec2::Vec2;

/// Planning/training timestep in seconds.
pub const DT: f64 = 0.4;
/// Number of observed history steps per agent.
pub const OBS_STEPS: usize = 8;
/// Prediction / planning horizon in steps.
pub const HORIZON: usize = 12;
/// Reserved agent id for the robot when it participates in joint scenes.
pub const ROBOT_ID: i64 = -1;
