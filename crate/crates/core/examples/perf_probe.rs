//! Quick timing probe for one full-scale planner tick.

use crowdmpc_core::planner::{mppi_step, GaussianPlanPolicy, PlannerConfig, PlannerHuman, PlanningInput};
use crowdmpc_core::predictor::{HeadInit, ModelKind, NetConfig, Params, PredictorWeights};
use crowdmpc_core::rewards::{RewardMap, RewardWeights};
use crowdmpc_core::scene::{AgentHistory, KinematicsConfig, RobotState};
use crowdmpc_core::vec2::Vec2;

fn main() {
    let w = PredictorWeights::init(ModelKind::Nar, true, &NetConfig::default(), 1, HeadInit::Random);
    let nar = Params::lift(&w).unwrap();
    let map = RewardMap::uniform(Vec2::new(-50.0, -50.0), 0.5, 200, 200, 0.0);
    let kin = KinematicsConfig::default();
    let rw = RewardWeights::default();
    let humans: Vec<PlannerHuman> = (0..5)
        .map(|k| {
            let y = -2.0 + k as f64;
            let hist: Vec<Vec2> = (0..8).map(|i| Vec2::new(3.0 - 0.3 * i as f64, y)).collect();
            PlannerHuman {
                id: k as i64,
                history: AgentHistory::from_recent(k as i64, &hist),
                goal: Vec2::new(-5.0, y),
            }
        })
        .collect();
    let input = PlanningInput {
        robot: RobotState::new(Vec2::ZERO, 0.0, 0.5, 0.0),
        robot_history: AgentHistory::from_recent(-1, &(0..8).map(|i| Vec2::new(-0.2 * (7 - i) as f64, 0.0)).collect::<Vec<_>>()),
        robot_goal: Vec2::new(8.0, 0.0),
        humans,
        map: &map,
        kinematics: &kin,
        rewards: &rw,
    };
    for (label, lam4) in [("default", 1.0), ("no-sir", 0.0)] {
    let rw = RewardWeights { lambda_social: lam4, ..RewardWeights::default() };
    let input = PlanningInput { rewards: &rw, ..input.clone() };
    let cfg = PlannerConfig::default();
    let mut policy = GaussianPlanPolicy::new(cfg.horizon, (cfg.sigma_linear, cfg.sigma_angular));
    // Warmup
    let _ = mppi_step(&input, &mut policy, &nar, &cfg, 0).unwrap();
    let mut times = Vec::new();
    for i in 0..25 {
        let t0 = std::time::Instant::now();
        let _ = mppi_step(&input, &mut policy, &nar, &cfg, i).unwrap();
        times.push(t0.elapsed().as_secs_f64() * 1000.0);
    }
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!("{label}: median {:.1} ms  min {:.1}  max {:.1}", times[times.len() / 2], times[0], times[times.len() - 1]);
    }
}
