//! Batched f32 inference engine for the planner's hot loop.
//!
//! The reference rollout in [`crate::predictor::nar`] is scalar f64 and
//! allocation-heavy; evaluating hundreds of plan samples per tick needs
//! more throughput than that path can give. This engine runs all samples
//! step-synchronized so each weight matrix stays cache-hot across the whole
//! batch, keeps activations in f32 with register-blocked kernels, and
//! replaces libm's tanh with a rational minimax approximation (about 1e-7
//! relative error). Per-sample values depend only on that sample's inputs
//! and noise stream, so results are bitwise independent of batch chunking
//! and worker count.
//!
//! Positions, rewards and everything downstream stay f64; only the network
//! arithmetic is f32.

use crate::predictor::net::{Params, ENC_IN, HEAD_OUT, SOC_IN};
use crate::predictor::{AgentSeed, GaussianStep, ModelKind, RolloutMode, LOG_STD_MAX, LOG_STD_MIN};
use crate::scene::{AgentHistory, NEIGHBOR_RADIUS};
use crate::vec2::Vec2;
use crate::{DT, HORIZON};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Plain sqrt distance; `hypot`'s extra care is wasted at meter scales.
#[inline]
fn dist_fast(a: Vec2, b: Vec2) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    (dx * dx + dy * dy).sqrt()
}

/// Magnitude clamp into the goal band without libm hypot.
#[inline]
fn clamp_goal_fast(v: Vec2) -> Vec2 {
    use crate::scene::{GOAL_MAX_DIST, GOAL_MIN_DIST};
    let n = (v.x * v.x + v.y * v.y).sqrt();
    if n <= 0.0 {
        return Vec2::new(GOAL_MIN_DIST, 0.0);
    }
    let c = n.clamp(GOAL_MIN_DIST, GOAL_MAX_DIST);
    v * (c / n)
}

/// Rational minimax tanh on f32, clamped outside [-9, 9]. Uses IEEE fused
/// multiply-adds, which are exactly defined and therefore reproducible on
/// any target that provides them.
#[inline]
pub fn tanh_fast(x: f32) -> f32 {
    const CLAMP: f32 = 9.0;
    let x = x.clamp(-CLAMP, CLAMP);
    let x2 = x * x;
    let mut p = -2.760_768_4e-16_f32;
    p = p.mul_add(x2, 2.000_188_0e-13);
    p = p.mul_add(x2, -8.604_672e-11);
    p = p.mul_add(x2, 5.122_297_e-8);
    p = p.mul_add(x2, 1.485_722_4e-5);
    p = p.mul_add(x2, 6.372_619_3e-4);
    p = p.mul_add(x2, 4.893_525_6e-3);
    let p = p * x;
    let mut q = 1.198_258_4e-6_f32;
    q = q.mul_add(x2, 1.185_347_1e-4);
    q = q.mul_add(x2, 2.268_434_6e-3);
    q = q.mul_add(x2, 4.893_525_2e-3);
    p / q
}

#[inline]
fn tanh_slice(v: &mut [f32]) {
    for x in v.iter_mut() {
        *x = tanh_fast(*x);
    }
}

/// `y[0..OW] += sum_d x[d] * wt[d * OW + o]` with the accumulator array
/// promoted to vector registers across the input dimension.
#[inline]
fn gemv_acc_fixed<const OW: usize>(x: &[f32], wt: &[f32], y: &mut [f32]) {
    debug_assert_eq!(y.len(), OW);
    debug_assert!(wt.len() >= x.len() * OW);
    let mut acc = [0.0f32; OW];
    acc.copy_from_slice(y);
    for (xv, row) in x.iter().zip(wt.chunks_exact(OW)) {
        for o in 0..OW {
            acc[o] = xv.mul_add(row[o], acc[o]);
        }
    }
    y.copy_from_slice(&acc);
}

/// Narrow-output variant for the 4-wide head.
#[inline]
fn gemv_acc_narrow(x: &[f32], wt: &[f32], out_w: usize, y: &mut [f32]) {
    for (d, xv) in x.iter().enumerate() {
        let row = &wt[d * out_w..(d + 1) * out_w];
        for o in 0..out_w {
            y[o] = xv.mul_add(row[o], y[o]);
        }
    }
}

#[inline]
fn gemv_acc(x: &[f32], wt: &[f32], out_w: usize, y: &mut [f32]) {
    match out_w {
        64 => gemv_acc_fixed::<64>(x, wt, y),
        48 => gemv_acc_fixed::<48>(x, wt, y),
        32 => gemv_acc_fixed::<32>(x, wt, y),
        16 => gemv_acc_fixed::<16>(x, wt, y),
        _ => gemv_acc_narrow(x, wt, out_w, y),
    }
}

/// Fused dense row: `out = tanh(bias + Wt x)` with the accumulator in
/// registers and a single store.
#[inline]
fn dense_tanh_row<const OW: usize>(x: &[f32], wt: &[f32], bias: &[f32], out: &mut [f32]) {
    let mut acc = [0.0f32; OW];
    acc.copy_from_slice(bias);
    for (xv, row) in x.iter().zip(wt.chunks_exact(OW)) {
        for o in 0..OW {
            acc[o] = xv.mul_add(row[o], acc[o]);
        }
    }
    for o in 0..OW {
        out[o] = tanh_fast(acc[o]);
    }
}

/// As [`dense_tanh_row`] but max-merged into `out` instead of stored
/// (`first` seeds the pool).
#[inline]
fn dense_tanh_row_max<const OW: usize>(
    x: &[f32],
    wt: &[f32],
    bias: &[f32],
    out: &mut [f32],
    first: bool,
) {
    let mut acc = [0.0f32; OW];
    acc.copy_from_slice(bias);
    for (xv, row) in x.iter().zip(wt.chunks_exact(OW)) {
        for o in 0..OW {
            acc[o] = xv.mul_add(row[o], acc[o]);
        }
    }
    if first {
        for o in 0..OW {
            out[o] = tanh_fast(acc[o]);
        }
    } else {
        for o in 0..OW {
            let v = tanh_fast(acc[o]);
            if v > out[o] {
                out[o] = v;
            }
        }
    }
}

/// Fused recurrent row: `h_out = tanh(b + Wx x + Wh h_in)`, one store.
#[inline]
fn rnn_row_fused<const H: usize>(net: &FastNet, x: &[f32], h_in: &[f32], h_out: &mut [f32]) {
    let mut acc = [0.0f32; H];
    acc.copy_from_slice(&net.rnn_b);
    for (xv, row) in x.iter().zip(net.rnn_wxt.chunks_exact(H)) {
        for o in 0..H {
            acc[o] = xv.mul_add(row[o], acc[o]);
        }
    }
    for (xv, row) in h_in.iter().zip(net.rnn_wht.chunks_exact(H)) {
        for o in 0..H {
            acc[o] = xv.mul_add(row[o], acc[o]);
        }
    }
    for o in 0..H {
        h_out[o] = tanh_fast(acc[o]);
    }
}

fn transpose(rows: usize, cols: usize, data: &[f32]) -> Vec<f32> {
    let mut t = vec![0.0f32; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            t[c * rows + r] = data[r * cols + c];
        }
    }
    t
}

/// f32 weights in input-major (transposed) layout for the row kernels.
pub struct FastNet {
    pub kind: ModelKind,
    pub goal_conditioned: bool,
    enc_hidden: usize,
    soc_hidden: usize,
    rnn_hidden: usize,
    rnn_in: usize,
    enc_w1t: Vec<f32>,
    enc_b1: Vec<f32>,
    enc_w2t: Vec<f32>,
    enc_b2: Vec<f32>,
    soc_w1t: Vec<f32>,
    soc_b1: Vec<f32>,
    soc_w2t: Vec<f32>,
    soc_b2: Vec<f32>,
    rnn_wxt: Vec<f32>,
    rnn_wht: Vec<f32>,
    rnn_b: Vec<f32>,
    head_wt: Vec<f32>,
    head_b: Vec<f32>,
}

impl FastNet {
    pub fn new(p: &Params) -> FastNet {
        let f32s = |m: &crate::predictor::net::Mat| -> Vec<f32> {
            m.data.iter().map(|v| *v as f32).collect()
        };
        let tr = |m: &crate::predictor::net::Mat| transpose(m.rows, m.cols, &f32s(m));
        let nar = p.kind == ModelKind::Nar;
        FastNet {
            kind: p.kind,
            goal_conditioned: p.goal_conditioned,
            enc_hidden: p.cfg.enc_hidden,
            soc_hidden: if nar { p.cfg.soc_hidden } else { 0 },
            rnn_hidden: p.cfg.rnn_hidden,
            rnn_in: p.cfg.rnn_in(p.kind),
            enc_w1t: tr(p.enc_w1()),
            enc_b1: f32s(p.enc_b1()),
            enc_w2t: tr(p.enc_w2()),
            enc_b2: f32s(p.enc_b2()),
            soc_w1t: if nar { tr(p.soc_w1()) } else { Vec::new() },
            soc_b1: if nar { f32s(p.soc_b1()) } else { Vec::new() },
            soc_w2t: if nar { tr(p.soc_w2()) } else { Vec::new() },
            soc_b2: if nar { f32s(p.soc_b2()) } else { Vec::new() },
            rnn_wxt: tr(p.rnn_wx()),
            rnn_wht: tr(p.rnn_wh()),
            rnn_b: f32s(p.rnn_b()),
            head_wt: tr(p.head_w()),
            head_b: f32s(p.head_b()),
        }
    }

    fn encode(&self, history: &AgentHistory, goal: Option<Vec2>) -> Vec<f32> {
        let x64 = crate::predictor::net::encoder_input(history, goal);
        let x: Vec<f32> = x64.iter().map(|v| *v as f32).collect();
        debug_assert_eq!(x.len(), ENC_IN);
        let mut a1 = self.enc_b1.clone();
        gemv_acc(&x, &self.enc_w1t, self.enc_hidden, &mut a1);
        tanh_slice(&mut a1);
        let mut h0 = self.enc_b2.clone();
        gemv_acc(&a1, &self.enc_w2t, self.rnn_hidden, &mut h0);
        tanh_slice(&mut h0);
        h0
    }
}

/// The robot's role in a batched rollout: shared history and goal, one
/// planned position sequence per sample.
pub struct WideRobot<'a> {
    pub history: &'a AgentHistory,
    pub goal: Vec2,
    /// Flattened `[batch][HORIZON]` planned positions.
    pub plans: &'a [Vec2],
}

/// Batched rollout outputs, sample-major.
pub struct WideRolloutOut {
    /// `[batch][step][human]` response positions.
    pub human_states: Vec<Vec<Vec<Vec2>>>,
    /// `[batch][step]` robot-as-human conditionals (empty without a robot).
    pub robot_gauss: Vec<Vec<GaussianStep>>,
    /// `[batch][human]` final positions.
    pub finals: Vec<Vec<Vec2>>,
}

/// Run a batched crowd rollout. In `Sample` mode each sample draws its
/// human actions from its own seeded stream; in `Mean` mode no randomness
/// is consumed. The robot, when present, has its positions substituted
/// from its per-sample plan; its own conditional is evaluated only when
/// `want_robot_gauss` asks for it (the social-influence pass does not).
pub fn wide_rollout(
    net: &FastNet,
    humans: &[AgentSeed],
    robot: Option<&WideRobot<'_>>,
    mode: RolloutMode,
    batch: usize,
    sample_seeds: &[u64],
    want_robot_gauss: bool,
) -> WideRolloutOut {
    assert_eq!(net.kind, ModelKind::Nar, "wide rollout is a NAR engine");
    let nh = humans.len();
    let k = nh + usize::from(robot.is_some());
    let h = net.rnn_hidden;
    let soc = net.soc_hidden;
    let rnn_in = net.rnn_in;
    if k == 0 || batch == 0 {
        return WideRolloutOut {
            human_states: vec![vec![vec![]; HORIZON]; batch],
            robot_gauss: vec![vec![]; batch],
            finals: vec![vec![]; batch],
        };
    }
    if mode == RolloutMode::Sample {
        assert_eq!(sample_seeds.len(), batch, "one noise stream per sample");
    }

    // Per-agent constants.
    let mut starts = Vec::with_capacity(k);
    let mut goals: Vec<Option<Vec2>> = Vec::with_capacity(k);
    let mut init_vel = Vec::with_capacity(k);
    let mut h0 = Vec::with_capacity(k);
    for s in humans {
        starts.push(s.history.current());
        goals.push(if net.goal_conditioned { s.goal } else { None });
        init_vel.push(s.history.last_velocity());
        h0.push(net.encode(&s.history, if net.goal_conditioned { s.goal } else { None }));
    }
    let robot_idx = robot.map(|r| {
        starts.push(r.history.current());
        let g = if net.goal_conditioned { Some(r.goal) } else { None };
        goals.push(g);
        init_vel.push(r.history.last_velocity());
        h0.push(net.encode(r.history, g));
        k - 1
    });

    // State: hidden [k][batch][h], positions [k][batch].
    let mut hidden = vec![0.0f32; k * batch * h];
    for a in 0..k {
        for b in 0..batch {
            hidden[(a * batch + b) * h..(a * batch + b + 1) * h].copy_from_slice(&h0[a]);
        }
    }
    let mut pos = vec![Vec2::ZERO; k * batch];
    let mut prev = vec![Vec2::ZERO; k * batch];
    for a in 0..k {
        for b in 0..batch {
            pos[a * batch + b] = starts[a];
            prev[a * batch + b] = starts[a] - init_vel[a] * DT;
        }
    }

    let mut rngs: Vec<ChaCha8Rng> = if mode == RolloutMode::Sample {
        sample_seeds
            .iter()
            .map(|s| crate::seeding::rng_from_seed(*s))
            .collect()
    } else {
        Vec::new()
    };

    let mut human_states = vec![vec![Vec::with_capacity(nh); 0]; 0];
    human_states.resize_with(batch, || Vec::with_capacity(HORIZON));
    let mut robot_gauss: Vec<Vec<GaussianStep>> =
        vec![Vec::with_capacity(if robot.is_some() { HORIZON } else { 0 }); batch];

    // Scratch reused across steps. Work runs layer by layer across the
    // whole batch so each weight matrix streams through cache once per
    // (agent, step); within a layer each row op is fully fused.
    let max_pairs = batch * crate::scene::MAX_NEIGHBORS.min(k.saturating_sub(1)).max(1);
    let mut xbuf = vec![0.0f32; batch * rnn_in];
    let mut pair_u = vec![0.0f32; max_pairs * SOC_IN];
    let mut pair_owner = vec![0u32; max_pairs];
    let mut s1 = vec![0.0f32; max_pairs * soc.max(1)];
    let mut vels = vec![Vec2::ZERO; k * batch];
    let mut gauss_step = vec![GaussianStep::new(Vec2::ZERO, [0.0, 0.0]); k * batch];
    let default_dims = soc == 32 && h == 64;

    for t in 0..HORIZON {
        for i in 0..k * batch {
            vels[i] = (pos[i] - prev[i]) / DT;
        }
        // Ego agents: all humans, plus the robot only when its conditional
        // is wanted (it always acts as a neighbor either way).
        for ego in 0..k {
            if Some(ego) == robot_idx && !want_robot_gauss {
                continue;
            }
            // Pass 1: prefixes and the pair buffer for the whole batch.
            let mut np = 0usize;
            for b in 0..batch {
                let pe = pos[ego * batch + b];
                let ve = vels[ego * batch + b];
                let xrow = &mut xbuf[b * rnn_in..(b + 1) * rnn_in];
                let d = pe - starts[ego];
                xrow[0] = d.x as f32;
                xrow[1] = d.y as f32;
                match goals[ego] {
                    Some(g) => {
                        let rel = clamp_goal_fast(g - pe);
                        xrow[2] = rel.x as f32;
                        xrow[3] = rel.y as f32;
                    }
                    None => {
                        xrow[2] = 0.0;
                        xrow[3] = 0.0;
                    }
                }
                // Neighbor selection: the nearest (at most 5) within radius.
                let mut cand: [(f64, usize); 8] = [(0.0, 0); 8];
                let mut nc = 0;
                for other in 0..k {
                    if other == ego {
                        continue;
                    }
                    let d = dist_fast(pos[other * batch + b], pe);
                    if d <= NEIGHBOR_RADIUS && nc < cand.len() {
                        cand[nc] = (d, other);
                        nc += 1;
                    }
                }
                if nc > crate::scene::MAX_NEIGHBORS {
                    cand[..nc].sort_by(|a, b2| a.0.partial_cmp(&b2.0).unwrap());
                    nc = crate::scene::MAX_NEIGHBORS;
                }
                if nc == 0 {
                    xrow[4..4 + soc].iter_mut().for_each(|v| *v = 0.0);
                }
                for (_, other) in cand[..nc].iter() {
                    let po = pos[other * batch + b];
                    let vo = vels[other * batch + b];
                    let u = &mut pair_u[np * SOC_IN..(np + 1) * SOC_IN];
                    u[0] = (po.x - pe.x) as f32;
                    u[1] = (po.y - pe.y) as f32;
                    u[2] = (vo.x - ve.x) as f32;
                    u[3] = (vo.y - ve.y) as f32;
                    pair_owner[np] = b as u32;
                    np += 1;
                }
            }

            // Pass 2: first pair layer over every pair, fused rows.
            for p in 0..np {
                let u = &pair_u[p * SOC_IN..(p + 1) * SOC_IN];
                let out = &mut s1[p * soc..(p + 1) * soc];
                if default_dims {
                    dense_tanh_row::<32>(u, &net.soc_w1t, &net.soc_b1, out);
                } else {
                    out.copy_from_slice(&net.soc_b1);
                    gemv_acc(u, &net.soc_w1t, soc, out);
                    tanh_slice(out);
                }
            }

            // Pass 3: second pair layer, max-merged straight into the
            // owner's pooled slot (owners are contiguous).
            let mut prev_owner = u32::MAX;
            for p in 0..np {
                let b = pair_owner[p] as usize;
                let row = &s1[p * soc..(p + 1) * soc];
                let pooled = &mut xbuf[b * rnn_in + 4..b * rnn_in + 4 + soc];
                let first = pair_owner[p] != prev_owner;
                prev_owner = pair_owner[p];
                if default_dims {
                    dense_tanh_row_max::<32>(row, &net.soc_w2t, &net.soc_b2, pooled, first);
                } else {
                    let mut s2 = net.soc_b2.clone();
                    gemv_acc(row, &net.soc_w2t, soc, &mut s2);
                    tanh_slice(&mut s2);
                    for (pv, sv) in pooled.iter_mut().zip(s2.iter()) {
                        if first || *sv > *pv {
                            *pv = *sv;
                        }
                    }
                }
            }

            // Pass 4: recurrent cell, fused per row.
            for b in 0..batch {
                let xrow = &xbuf[b * rnn_in..(b + 1) * rnn_in];
                let hrow = &mut hidden[(ego * batch + b) * h..(ego * batch + b + 1) * h];
                if default_dims {
                    let mut hout = [0.0f32; 64];
                    rnn_row_fused::<64>(net, xrow, hrow, &mut hout);
                    hrow.copy_from_slice(&hout);
                } else {
                    let mut acc = net.rnn_b.clone();
                    gemv_acc(xrow, &net.rnn_wxt, h, &mut acc);
                    gemv_acc(hrow, &net.rnn_wht, h, &mut acc);
                    tanh_slice(&mut acc);
                    hrow.copy_from_slice(&acc);
                }
            }

            // Pass 5: head.
            for b in 0..batch {
                let hrow = &hidden[(ego * batch + b) * h..(ego * batch + b + 1) * h];
                let mut head = [0.0f32; HEAD_OUT];
                head.copy_from_slice(&net.head_b);
                gemv_acc_narrow(hrow, &net.head_wt, HEAD_OUT, &mut head);
                let ls0 = (head[2] as f64).clamp(LOG_STD_MIN, LOG_STD_MAX);
                let ls1 = (head[3] as f64).clamp(LOG_STD_MIN, LOG_STD_MAX);
                gauss_step[ego * batch + b] =
                    GaussianStep::new(Vec2::new(head[0] as f64, head[1] as f64), [ls0, ls1]);
            }
        }

        // Advance positions: humans by their actions, robot from its plan.
        prev.copy_from_slice(&pos);
        for b in 0..batch {
            let mut step_positions = Vec::with_capacity(nh);
            for a in 0..nh {
                let g = gauss_step[a * batch + b];
                let action = match mode {
                    RolloutMode::Mean => g.mean,
                    RolloutMode::Sample => {
                        let s = g.std();
                        let zx: f64 = rngs[b].sample(StandardNormal);
                        let zy: f64 = rngs[b].sample(StandardNormal);
                        Vec2::new(g.mean.x + s[0] * zx, g.mean.y + s[1] * zy)
                    }
                };
                let next = crate::dynamics::human_step(pos[a * batch + b], action);
                pos[a * batch + b] = next;
                step_positions.push(next);
            }
            if let (Some(r), Some(ri)) = (robot, robot_idx) {
                if want_robot_gauss {
                    robot_gauss[b].push(gauss_step[ri * batch + b]);
                }
                pos[ri * batch + b] = r.plans[b * HORIZON + t];
            }
            human_states[b].push(step_positions);
        }
    }

    let finals: Vec<Vec<Vec2>> = (0..batch)
        .map(|b| human_states[b][HORIZON - 1].clone())
        .collect();
    WideRolloutOut {
        human_states,
        robot_gauss,
        finals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictor::net::{HeadInit, NetConfig};
    use crate::predictor::{nar_conditioned_rollout, PredictorWeights, RobotPlanInput};

    fn weights() -> PredictorWeights {
        PredictorWeights::init(
            ModelKind::Nar,
            true,
            &NetConfig::default(),
            21,
            HeadInit::Random,
        )
    }

    fn human(id: i64, x: f64, y: f64) -> AgentSeed {
        let hist: Vec<Vec2> = (0..8).map(|i| Vec2::new(x + 0.25 * i as f64, y)).collect();
        AgentSeed {
            id,
            history: AgentHistory::from_recent(id, &hist),
            goal: Some(Vec2::new(x + 6.0, y)),
        }
    }

    #[test]
    fn tanh_fast_accuracy() {
        for i in -900..=900 {
            let x = i as f32 * 0.01;
            let err = (tanh_fast(x) - x.tanh()).abs();
            assert!(err < 3e-7, "x={x}: err {err}");
        }
        assert_eq!(tanh_fast(20.0), tanh_fast(9.0));
    }

    #[test]
    fn wide_mean_matches_reference_rollout() {
        let w = weights();
        let p = Params::lift(&w).unwrap();
        let net = FastNet::new(&p);
        let humans = vec![human(1, 0.0, 0.0), human(2, 1.0, 1.5), human(3, -1.0, 0.5)];
        let hist = AgentHistory::from_recent(crate::ROBOT_ID, &[Vec2::new(-0.5, -1.0), Vec2::new(-0.25, -1.0)]);
        let plan: Vec<Vec2> = (0..HORIZON).map(|t| Vec2::new(-0.25 + 0.2 * (t + 1) as f64, -1.0)).collect();
        let robot = WideRobot {
            history: &hist,
            goal: Vec2::new(6.0, -1.0),
            plans: &plan,
        };
        let wide = wide_rollout(&net, &humans, Some(&robot), RolloutMode::Mean, 1, &[], true);

        let reference = nar_conditioned_rollout(
            &w,
            &humans,
            Some(RobotPlanInput {
                history: &hist,
                goal: Vec2::new(6.0, -1.0),
                plan: &plan,
            }),
            RolloutMode::Mean,
            0,
        )
        .unwrap();

        for t in 0..HORIZON {
            for i in 0..humans.len() {
                let d = wide.human_states[0][t][i].dist(reference.human_states[t][i]);
                assert!(d < 2e-4, "step {t} agent {i}: drift {d}");
            }
            let dg = (wide.robot_gauss[0][t].mean - reference.robot_steps[t].mean).norm();
            assert!(dg < 2e-4, "robot gauss drift {dg} at {t}");
        }
    }

    #[test]
    fn batched_samples_are_chunk_invariant() {
        let w = weights();
        let p = Params::lift(&w).unwrap();
        let net = FastNet::new(&p);
        let humans = vec![human(1, 0.0, 0.0), human(2, 1.0, 1.5)];
        let hist = AgentHistory::from_recent(crate::ROBOT_ID, &[Vec2::new(-0.5, -1.0)]);
        let plans: Vec<Vec2> = (0..4 * HORIZON)
            .map(|i| Vec2::new(0.05 * i as f64, -1.0))
            .collect();
        let seeds = [11u64, 22, 33, 44];
        let robot_all = WideRobot {
            history: &hist,
            goal: Vec2::new(6.0, -1.0),
            plans: &plans,
        };
        let all = wide_rollout(&net, &humans, Some(&robot_all), RolloutMode::Sample, 4, &seeds, true);
        for b in 0..4 {
            let robot_one = WideRobot {
                history: &hist,
                goal: Vec2::new(6.0, -1.0),
                plans: &plans[b * HORIZON..(b + 1) * HORIZON],
            };
            let one = wide_rollout(
                &net,
                &humans,
                Some(&robot_one),
                RolloutMode::Sample,
                1,
                &seeds[b..b + 1],
                true,
            );
            assert_eq!(all.human_states[b], one.human_states[0], "sample {b}");
            for (x, y) in all.robot_gauss[b].iter().zip(one.robot_gauss[0].iter()) {
                assert_eq!(x, y);
            }
        }
    }
}
