//! End-to-end desk-scale pipeline probe: train compact models on scripted
//! crowds, then benchmark the sampling planner against DWA.

use crowdmpc_core::bench::synthetic::{benchmark_crowd, training_corpus, CrowdPattern};
use crowdmpc_core::bench::{
    make_scenes, run_benchmark, DwaConfig, DwaPolicy, EpisodeOptions, MpcNavigator,
};
use crowdmpc_core::predictor::{
    build_her_windows, nar_conditioned_rollout, train_mle, AgentSeed, HeadInit, ModelKind,
    NetConfig, Params, PredictorWeights, RolloutMode, TrainHyper,
};
use crowdmpc_core::planner::PlannerConfig;
use crowdmpc_core::rewards::{RewardMap, RewardWeights};
use crowdmpc_core::scene::KinematicsConfig;
use crowdmpc_core::vec2::Vec2;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let tracks = training_corpus(42, 3);
    let windows = build_her_windows(&tracks);
    println!(
        "[{:?}] corpus: {} tracks, {} windows, {} agent-windows",
        t0.elapsed(),
        tracks.len(),
        windows.len(),
        windows.iter().map(|w| w.agents.len()).sum::<usize>()
    );

    let epochs: usize = std::env::var("EPOCHS").ok().and_then(|v| v.parse().ok()).unwrap_or(40);
    let hyper = TrainHyper {
        learning_rate: 3e-3,
        epochs,
        batch_size: 24,
        collision_weight: 0.3,
        seed: 7,
    };
    let cache = std::path::PathBuf::from(format!("/tmp/desk_nar_{epochs}.cpwt"));
    let cache_niar = std::path::PathBuf::from(format!("/tmp/desk_niar_{epochs}.cpwt"));
    let (nar_w, niar_w);
    if cache.exists() && cache_niar.exists() {
        nar_w = crowdmpc_core::predictor::load_weights(&cache).unwrap();
        niar_w = crowdmpc_core::predictor::load_weights(&cache_niar).unwrap();
        println!("[{:?}] loaded cached weights", t0.elapsed());
    } else {
        let nar0 = PredictorWeights::init(ModelKind::Nar, true, &NetConfig::default(), 1, HeadInit::Zero);
        let t1 = Instant::now();
        let nar_res = train_mle(&windows, &nar0, &hyper).unwrap();
        println!(
            "[{:?}] nar: loss {:.3} -> {:.3} ({} epochs, {:.1}s)",
            t0.elapsed(),
            nar_res.loss_history[0],
            nar_res.loss_history.last().unwrap(),
            hyper.epochs,
            t1.elapsed().as_secs_f64()
        );
        let niar0 = PredictorWeights::init(ModelKind::Niar, false, &NetConfig::default(), 2, HeadInit::Zero);
        let t2 = Instant::now();
        let niar_res = train_mle(&windows, &niar0, &hyper).unwrap();
        println!(
            "[{:?}] niar(nogoal): loss {:.3} -> {:.3} ({:.1}s)",
            t0.elapsed(),
            niar_res.loss_history[0],
            niar_res.loss_history.last().unwrap(),
            t2.elapsed().as_secs_f64()
        );
        crowdmpc_core::predictor::save_weights(&nar_res.weights, &cache).unwrap();
        crowdmpc_core::predictor::save_weights(&niar_res.weights, &cache_niar).unwrap();
        nar_w = nar_res.weights;
        niar_w = niar_res.weights;
    }
    let nar = nar_w;
    let niar = niar_w;

    // Straight-walk sanity: a constant-velocity human should keep going.
    let hist: Vec<Vec2> = (0..8).map(|i| Vec2::new(0.44 * i as f64, 0.0)).collect();
    let seed_agent = AgentSeed {
        id: 0,
        history: crowdmpc_core::scene::AgentHistory::from_recent(0, &hist),
        goal: Some(Vec2::new(0.44 * 7.0 + 5.3, 0.0)),
    };
    let roll = nar_conditioned_rollout(&nar, &[seed_agent], None, RolloutMode::Mean, 0).unwrap();
    let end = roll.human_states[11][0];
    let expect = Vec2::new(0.44 * 7.0 + 0.44 * 12.0, 0.0);
    println!(
        "straight-walk end {:?} vs constant-velocity {:?} (err {:.3} m)",
        end,
        expect,
        end.dist(expect)
    );

    // Mixed benchmark: crossing + overtaking + a held-out recorded slice
    // that goes through the trajectory-file pipeline.
    let mut eval_tracks = benchmark_crowd(CrowdPattern::Crossing, 15, 1000);
    let mut overtaking = benchmark_crowd(CrowdPattern::Overtaking, 15, 2000);
    let shift = 15 * crowdmpc_core::bench::SCENE_STEPS as i64;
    crowdmpc_core::bench::synthetic::offset_scene(&mut overtaking, shift, Vec2::ZERO);
    eval_tracks.extend(overtaking);
    let mut recorded = benchmark_crowd(CrowdPattern::Corridor, 10, 3000);
    crowdmpc_core::bench::synthetic::offset_scene(&mut recorded, 2 * shift, Vec2::ZERO);
    // Round-trip the "recorded" slice through the text format.
    let dir = std::env::temp_dir().join("desk_eval.txt");
    crowdmpc_core::bench::write_trajectory_file(&recorded, 2.5, &dir).unwrap();
    let loaded = crowdmpc_core::bench::load_trajectories(&dir, 2.5).unwrap();
    eval_tracks.extend(loaded);
    let scene_set = make_scenes(&eval_tracks, 9);
    println!(
        "[{:?}] eval scenes: {} (skipped {})",
        t0.elapsed(),
        scene_set.scenes.len(),
        scene_set.skipped
    );

    let kin = KinematicsConfig::default();
    let opts = EpisodeOptions::default();
    let map = RewardMap::uniform(Vec2::new(-100.0, -100.0), 1.0, 400, 400, 0.0);
    let nar_params = Params::lift(&nar).unwrap();
    let niar_params = Params::lift(&niar).unwrap();

    let samples: usize = std::env::var("SAMPLES").ok().and_then(|v| v.parse().ok()).unwrap_or(800);
    let temp: f64 = std::env::var("TEMP").ok().and_then(|v| v.parse().ok()).unwrap_or(1.0);
    let sig_a: f64 = std::env::var("SIGA").ok().and_then(|v| v.parse().ok()).unwrap_or(0.6);
    let iters: usize = std::env::var("ITERS").ok().and_then(|v| v.parse().ok()).unwrap_or(1);
    let planner_cfg = PlannerConfig {
        samples,
        temperature: temp,
        sigma_angular: sig_a,
        iterations: iters,
        ..PlannerConfig::default()
    };
    let rewards = RewardWeights::default();

    let t3 = Instant::now();
    let mppi_report = run_benchmark(
        &scene_set.scenes,
        &|| {
            Box::new(MpcNavigator::new(
                nar_params.clone(),
                niar_params.clone(),
                map.clone(),
                planner_cfg,
                rewards,
                64,
            ))
        },
        2,
        &kin,
        &opts,
        77,
    );
    println!(
        "[{:?}] mppi-nar: success {:.1}% coll21 {:.1}% coll31 {:.1}% timeout {:.1}% fb {:.1}% ({:.1}s)",
        t0.elapsed(),
        mppi_report.metrics.success,
        mppi_report.metrics.coll_21,
        mppi_report.metrics.coll_31,
        mppi_report.metrics.timeout,
        mppi_report.metrics.fb,
        t3.elapsed().as_secs_f64()
    );

    let dwa_report = run_benchmark(
        &scene_set.scenes,
        &|| Box::new(DwaPolicy::new(DwaConfig::default())),
        2,
        &kin,
        &opts,
        77,
    );
    println!(
        "[{:?}] dwa:      success {:.1}% coll21 {:.1}% coll31 {:.1}% timeout {:.1}% fb {:.1}%",
        t0.elapsed(),
        dwa_report.metrics.success,
        dwa_report.metrics.coll_21,
        dwa_report.metrics.coll_31,
        dwa_report.metrics.timeout,
        dwa_report.metrics.fb
    );
}
