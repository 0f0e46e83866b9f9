//! Benchmark harness: trajectory ingestion, scene construction, the
//! replayed-crowd evaluation protocol, metrics, and baseline policies.

mod baselines;
mod dataset;
mod metrics;
mod runner;
mod scenes;
pub mod synthetic;

pub use baselines::{
    constant_velocity_conditional, DwaConfig, DwaPolicy, GcbcKind, GcbcPolicy, GoalSeekPolicy,
    IdlePolicy,
};
pub use dataset::{load_trajectories, write_trajectory_file};
pub use metrics::{compute_metrics, MetricSet};
pub use runner::{
    run_benchmark, run_episode, EpisodeLog, EpisodeOptions, MpcNavigator, NavigationPolicy,
    Outcome, TickInput,
};
pub use scenes::{make_scenes, BenchScene, SceneSet, SCENE_STEPS};

use serde::{Deserialize, Serialize};

/// Aggregated benchmark output for one algorithm.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    pub algorithm: String,
    pub scenes: usize,
    pub repeats: usize,
    /// Metric means over repeats.
    pub metrics: MetricSet,
    pub per_repeat: Vec<MetricSet>,
    pub episodes: Vec<EpisodeLog>,
    /// Mean wall-clock per tick in milliseconds; populated only when timing
    /// was requested, so default reports stay byte-deterministic.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}
