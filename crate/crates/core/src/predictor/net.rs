//! Compact network internals: parameter layout, initialization, and the
//! forward building blocks shared by inference and training.
//!
//! Architecture (per agent):
//! - encoder: 2-layer tanh feedforward over the flattened 8-step relative
//!   history, the per-step validity bits and the clamped relative goal
//!   (26 inputs) producing the initial recurrent hidden state;
//! - social pooling (NAR only): 2-layer tanh feedforward over each
//!   neighbor's relative position and velocity, max-pooled elementwise;
//! - decoder: one tanh recurrent cell unrolled over the horizon;
//! - head: linear layer to action mean (2) and log-std (2).

use crate::error::{Error, Result};
use crate::predictor::{ModelKind, PredictorWeights, Tensor};
use crate::scene::{clamp_goal, AgentHistory};
use crate::vec2::Vec2;
use crate::{DT, OBS_STEPS};
use rand::Rng;

/// Encoder input width: 8 relative positions, 8 validity bits, 2 goal dims.
pub const ENC_IN: usize = 2 * OBS_STEPS + OBS_STEPS + 2;
/// Social pair input width: relative position and relative velocity.
pub const SOC_IN: usize = 4;
/// Head output width: action mean (2) + log-std (2).
pub const HEAD_OUT: usize = 4;

/// Hidden sizes of one compact network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetConfig {
    pub enc_hidden: usize,
    pub soc_hidden: usize,
    pub rnn_hidden: usize,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            enc_hidden: 64,
            soc_hidden: 32,
            rnn_hidden: 64,
        }
    }
}

impl NetConfig {
    /// Width of the recurrent input for a model kind. The NAR decoder sees
    /// [displacement-since-start, remaining goal, social context]; the NIAR
    /// decoder sees [displacement-since-start, remaining goal, previous z].
    pub fn rnn_in(&self, kind: ModelKind) -> usize {
        match kind {
            ModelKind::Nar => 4 + self.soc_hidden,
            ModelKind::Niar => 6,
        }
    }

    /// Named tensor shapes in their fixed serialization order.
    pub fn layout(&self, kind: ModelKind) -> Vec<(&'static str, usize, usize)> {
        let mut v = vec![
            ("enc.w1", self.enc_hidden, ENC_IN),
            ("enc.b1", self.enc_hidden, 1),
            ("enc.w2", self.rnn_hidden, self.enc_hidden),
            ("enc.b2", self.rnn_hidden, 1),
        ];
        if kind == ModelKind::Nar {
            v.push(("soc.w1", self.soc_hidden, SOC_IN));
            v.push(("soc.b1", self.soc_hidden, 1));
            v.push(("soc.w2", self.soc_hidden, self.soc_hidden));
            v.push(("soc.b2", self.soc_hidden, 1));
        }
        v.push(("rnn.wx", self.rnn_hidden, self.rnn_in(kind)));
        v.push(("rnn.wh", self.rnn_hidden, self.rnn_hidden));
        v.push(("rnn.b", self.rnn_hidden, 1));
        v.push(("head.w", HEAD_OUT, self.rnn_hidden));
        v.push(("head.b", HEAD_OUT, 1));
        v
    }
}

/// How to initialize the output head.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeadInit {
    /// Zero head: the untrained model emits mean (0,0) with log-std 0.
    Zero,
    /// Small random head, used by gradient-check fixtures so no parameter
    /// sits in a structurally zero-gradient region.
    Random,
}

impl PredictorWeights {
    /// Fresh weights: Xavier-uniform hidden layers, zero biases.
    pub fn init(
        kind: ModelKind,
        goal_conditioned: bool,
        cfg: &NetConfig,
        seed: u64,
        head: HeadInit,
    ) -> Self {
        let mut rng = crate::seeding::rng_from_seed(seed);
        let tensors = cfg
            .layout(kind)
            .into_iter()
            .map(|(name, rows, cols)| {
                let mut t = Tensor::zeros(name, rows, cols);
                let is_bias = cols == 1;
                let is_head = name.starts_with("head.");
                if !is_bias && (!is_head || head == HeadInit::Random) {
                    let scale = if is_head {
                        0.1
                    } else {
                        (6.0 / (rows + cols) as f64).sqrt()
                    };
                    for v in t.data.iter_mut() {
                        *v = (rng.gen_range(-scale..scale)) as f32;
                    }
                } else if is_head && head == HeadInit::Random && is_bias {
                    for v in t.data.iter_mut() {
                        *v = (rng.gen_range(-0.05..0.05)) as f32;
                    }
                }
                t
            })
            .collect();
        PredictorWeights {
            kind,
            goal_conditioned,
            tensors,
        }
    }

    /// Derive the hidden sizes from the stored shapes and verify that every
    /// tensor is mutually consistent with them.
    pub fn net_config(&self) -> Result<NetConfig> {
        let find = |name: &str| -> Result<&Tensor> {
            self.tensors
                .iter()
                .find(|t| t.name == name)
                .ok_or_else(|| Error::WeightsFormat(format!("missing tensor '{name}'")))
        };
        let enc_hidden = find("enc.w1")?.rows;
        let rnn_hidden = find("rnn.wh")?.rows;
        let soc_hidden = if self.kind == ModelKind::Nar {
            find("soc.w1")?.rows
        } else {
            0
        };
        let cfg = NetConfig {
            enc_hidden,
            soc_hidden: if self.kind == ModelKind::Nar { soc_hidden } else { NetConfig::default().soc_hidden },
            rnn_hidden,
        };
        let expected = cfg.layout(self.kind);
        if expected.len() != self.tensors.len() {
            return Err(Error::WeightsFormat(format!(
                "expected {} tensors for {} model, found {}",
                expected.len(),
                self.kind,
                self.tensors.len()
            )));
        }
        for ((name, rows, cols), t) in expected.iter().zip(self.tensors.iter()) {
            if t.name != *name || t.rows != *rows || t.cols != *cols {
                return Err(Error::ShapeMismatch {
                    name: t.name.clone(),
                    expected: (*rows, *cols),
                    found: (t.rows, t.cols),
                });
            }
            if t.data.len() != rows * cols {
                return Err(Error::WeightsFormat(format!(
                    "tensor '{}' has {} values, expected {}",
                    t.name,
                    t.data.len(),
                    rows * cols
                )));
            }
        }
        Ok(cfg)
    }
}

/// Row-major f64 matrix, the compute-side mirror of a [`Tensor`].
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

/// Dot product with manual 4-way unrolling so the accumulation vectorizes.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let chunks = a.len() / 4;
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..chunks {
        let j = i * 4;
        s0 += a[j] * b[j];
        s1 += a[j + 1] * b[j + 1];
        s2 += a[j + 2] * b[j + 2];
        s3 += a[j + 3] * b[j + 3];
    }
    let mut s = (s0 + s1) + (s2 + s3);
    for j in chunks * 4..a.len() {
        s += a[j] * b[j];
    }
    s
}

/// `out = W x + b` where `b` is a column bias.
pub fn affine(w: &Mat, b: &Mat, x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(w.cols, x.len());
    debug_assert_eq!(w.rows, out.len());
    for r in 0..w.rows {
        out[r] = dot(w.row(r), x) + b.data[r];
    }
}

/// `out += W x`.
pub fn matvec_acc(w: &Mat, x: &[f64], out: &mut [f64]) {
    for r in 0..w.rows {
        out[r] += dot(w.row(r), x);
    }
}

/// `out += W^T d` — the input-gradient product.
pub fn matvec_t_acc(w: &Mat, d: &[f64], out: &mut [f64]) {
    debug_assert_eq!(w.rows, d.len());
    debug_assert_eq!(w.cols, out.len());
    for r in 0..w.rows {
        let dr = d[r];
        if dr != 0.0 {
            let row = w.row(r);
            for c in 0..w.cols {
                out[c] += row[c] * dr;
            }
        }
    }
}

/// `dW += d x^T` — the weight-gradient outer product.
pub fn outer_acc(dw: &mut Mat, d: &[f64], x: &[f64]) {
    debug_assert_eq!(dw.rows, d.len());
    debug_assert_eq!(dw.cols, x.len());
    for r in 0..dw.rows {
        let dr = d[r];
        if dr != 0.0 {
            let row = &mut dw.data[r * dw.cols..(r + 1) * dw.cols];
            for c in 0..dw.cols {
                row[c] += dr * x[c];
            }
        }
    }
}

pub fn tanh_inplace(v: &mut [f64]) {
    for x in v.iter_mut() {
        *x = x.tanh();
    }
}

/// f64 compute-side parameters, lifted from [`PredictorWeights`].
#[derive(Debug, Clone)]
pub struct Params {
    pub kind: ModelKind,
    pub goal_conditioned: bool,
    pub cfg: NetConfig,
    pub mats: Vec<Mat>,
}

impl Params {
    pub fn lift(weights: &PredictorWeights) -> Result<Params> {
        let cfg = weights.net_config()?;
        let mats = weights
            .tensors
            .iter()
            .map(|t| Mat {
                rows: t.rows,
                cols: t.cols,
                data: t.data.iter().map(|v| *v as f64).collect(),
            })
            .collect();
        Ok(Params {
            kind: weights.kind,
            goal_conditioned: weights.goal_conditioned,
            cfg,
            mats,
        })
    }

    /// Quantize back to the f32 storage representation.
    pub fn quantize(&self) -> PredictorWeights {
        let layout = self.cfg.layout(self.kind);
        let tensors = layout
            .iter()
            .zip(self.mats.iter())
            .map(|((name, rows, cols), m)| Tensor {
                name: name.to_string(),
                rows: *rows,
                cols: *cols,
                data: m.data.iter().map(|v| *v as f32).collect(),
            })
            .collect();
        PredictorWeights {
            kind: self.kind,
            goal_conditioned: self.goal_conditioned,
            tensors,
        }
    }

    pub fn zeros_like(&self) -> Params {
        Params {
            kind: self.kind,
            goal_conditioned: self.goal_conditioned,
            cfg: self.cfg,
            mats: self
                .mats
                .iter()
                .map(|m| Mat::zeros(m.rows, m.cols))
                .collect(),
        }
    }

    fn index_of(&self, name: &str) -> usize {
        self.cfg
            .layout(self.kind)
            .iter()
            .position(|(n, _, _)| *n == name)
            .unwrap_or_else(|| panic!("no tensor '{name}' in {} layout", self.kind))
    }

    pub fn mat(&self, name: &str) -> &Mat {
        &self.mats[self.index_of(name)]
    }

    pub fn mat_mut(&mut self, name: &str) -> &mut Mat {
        let i = self.index_of(name);
        &mut self.mats[i]
    }

    pub fn param_count(&self) -> usize {
        self.mats.iter().map(|m| m.data.len()).sum()
    }

    pub fn flat_iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.mats.iter().flat_map(|m| m.data.iter().copied())
    }

    pub fn for_each_flat_mut(&mut self, mut f: impl FnMut(usize, &mut f64)) {
        let mut idx = 0;
        for m in self.mats.iter_mut() {
            for v in m.data.iter_mut() {
                f(idx, v);
                idx += 1;
            }
        }
    }
}

// Named accessors keep the forward/backward code readable.
macro_rules! accessors {
    ($($fn_name:ident, $mut_name:ident => $tensor:expr;)*) => {
        impl Params {
            $(
                pub fn $fn_name(&self) -> &Mat { self.mat($tensor) }
                #[allow(dead_code)]
                pub fn $mut_name(&mut self) -> &mut Mat { self.mat_mut($tensor) }
            )*
        }
    };
}

accessors! {
    enc_w1, enc_w1_mut => "enc.w1";
    enc_b1, enc_b1_mut => "enc.b1";
    enc_w2, enc_w2_mut => "enc.w2";
    enc_b2, enc_b2_mut => "enc.b2";
    soc_w1, soc_w1_mut => "soc.w1";
    soc_b1, soc_b1_mut => "soc.b1";
    soc_w2, soc_w2_mut => "soc.w2";
    soc_b2, soc_b2_mut => "soc.b2";
    rnn_wx, rnn_wx_mut => "rnn.wx";
    rnn_wh, rnn_wh_mut => "rnn.wh";
    rnn_b, rnn_b_mut => "rnn.b";
    head_w, head_w_mut => "head.w";
    head_b, head_b_mut => "head.b";
}

/// Flattened encoder input for one agent: relative history, validity bits
/// and the clamped relative goal. `goal = None` zeroes the goal slots (the
/// goal-unconditioned variant).
pub fn encoder_input(history: &AgentHistory, goal: Option<Vec2>) -> Vec<f64> {
    let mut x = vec![0.0; ENC_IN];
    let cur = history.current();
    for i in 0..OBS_STEPS {
        if history.valid[i] {
            let r = history.positions[i] - cur;
            x[2 * i] = r.x;
            x[2 * i + 1] = r.y;
            x[2 * OBS_STEPS + i] = 1.0;
        }
    }
    if let Some(g) = goal {
        let rel = clamp_goal(g - cur);
        x[ENC_IN - 2] = rel.x;
        x[ENC_IN - 1] = rel.y;
    }
    x
}

/// Recurrent-step input prefix shared by both kinds: displacement since the
/// rollout start and the clamped remaining goal vector (or zeros).
pub fn step_prefix(pos: Vec2, start: Vec2, goal: Option<Vec2>) -> [f64; 4] {
    let d = pos - start;
    match goal {
        Some(g) => {
            let rel = clamp_goal(g - pos);
            [d.x, d.y, rel.x, rel.y]
        }
        None => [d.x, d.y, 0.0, 0.0],
    }
}

/// Social pair input: neighbor position and velocity relative to the ego.
pub fn social_pair_input(ego_pos: Vec2, ego_vel: Vec2, other_pos: Vec2, other_vel: Vec2) -> [f64; SOC_IN] {
    let dp = other_pos - ego_pos;
    let dv = other_vel - ego_vel;
    [dp.x, dp.y, dv.x, dv.y]
}

/// Velocity from consecutive positions.
pub fn velocity_of(cur: Vec2, prev: Vec2) -> Vec2 {
    (cur - prev) / DT
}

/// Encoder forward: `h0 = tanh(W2 tanh(W1 x + b1) + b2)`. Returns the
/// hidden layer activation as well, for the backward pass.
pub fn encoder_forward(p: &Params, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut a1 = vec![0.0; p.cfg.enc_hidden];
    affine(p.enc_w1(), p.enc_b1(), x, &mut a1);
    tanh_inplace(&mut a1);
    let mut h0 = vec![0.0; p.cfg.rnn_hidden];
    affine(p.enc_w2(), p.enc_b2(), &a1, &mut h0);
    tanh_inplace(&mut h0);
    (a1, h0)
}

/// Social pair forward: two tanh layers. Returns both activations.
pub fn social_forward(p: &Params, u: &[f64; SOC_IN]) -> (Vec<f64>, Vec<f64>) {
    let mut s1 = vec![0.0; p.cfg.soc_hidden];
    affine(p.soc_w1(), p.soc_b1(), u, &mut s1);
    tanh_inplace(&mut s1);
    let mut s2 = vec![0.0; p.cfg.soc_hidden];
    affine(p.soc_w2(), p.soc_b2(), &s1, &mut s2);
    tanh_inplace(&mut s2);
    (s1, s2)
}

/// Recurrent cell: `h' = tanh(Wx x + Wh h + b)`.
pub fn rnn_step(p: &Params, x: &[f64], h: &[f64]) -> Vec<f64> {
    let mut pre = vec![0.0; p.cfg.rnn_hidden];
    affine(p.rnn_wx(), p.rnn_b(), x, &mut pre);
    matvec_acc(p.rnn_wh(), h, &mut pre);
    tanh_inplace(&mut pre);
    pre
}

/// Head forward: raw 4-vector `[mean_x, mean_y, log_std_x, log_std_y]`
/// before the log-std clamp.
pub fn head_forward(p: &Params, h: &[f64]) -> [f64; HEAD_OUT] {
    let mut out = [0.0; HEAD_OUT];
    affine(p.head_w(), p.head_b(), h, &mut out);
    out
}

/// Max-pool social embeddings elementwise; returns the pooled vector and,
/// per dimension, the index of the winning neighbor (for backprop).
/// No neighbors pools to zeros.
pub fn max_pool(embeddings: &[Vec<f64>], width: usize) -> (Vec<f64>, Vec<usize>) {
    let mut pooled = vec![0.0; width];
    let mut argmax = vec![usize::MAX; width];
    for (j, e) in embeddings.iter().enumerate() {
        for d in 0..width {
            if j == 0 || e[d] > pooled[d] {
                pooled[d] = e[d];
                argmax[d] = j;
            }
        }
    }
    if embeddings.is_empty() {
        pooled.iter_mut().for_each(|v| *v = 0.0);
    }
    (pooled, argmax)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_roundtrip_and_config_derivation() {
        for kind in [ModelKind::Nar, ModelKind::Niar] {
            let cfg = NetConfig {
                enc_hidden: 6,
                soc_hidden: 5,
                rnn_hidden: 7,
            };
            let w = PredictorWeights::init(kind, true, &cfg, 3, HeadInit::Random);
            let derived = w.net_config().unwrap();
            assert_eq!(derived.enc_hidden, 6);
            assert_eq!(derived.rnn_hidden, 7);
            if kind == ModelKind::Nar {
                assert_eq!(derived.soc_hidden, 5);
            }
            let p = Params::lift(&w).unwrap();
            assert_eq!(p.quantize(), w);
        }
    }

    #[test]
    fn inconsistent_shapes_rejected() {
        let cfg = NetConfig::default();
        let mut w = PredictorWeights::init(ModelKind::Nar, true, &cfg, 0, HeadInit::Zero);
        w.tensors[0].cols = 11;
        w.tensors[0].data.truncate(64 * 11);
        assert!(w.net_config().is_err());
    }

    #[test]
    fn encoder_input_layout() {
        let h = AgentHistory::from_recent(0, &[Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)]);
        let x = encoder_input(&h, Some(Vec2::new(2.0, 5.0)));
        // Second-newest step sits at slot 6: relative position (-1, 0).
        assert_eq!(x[12], -1.0);
        assert_eq!(x[13], 0.0);
        // Newest slot is always zero relative to itself.
        assert_eq!(x[14], 0.0);
        // Validity bits.
        assert_eq!(x[16], 0.0);
        assert_eq!(x[22], 1.0);
        assert_eq!(x[23], 1.0);
        // Goal (0, 5) relative to current (2, 0) has norm 5, already in band.
        assert_eq!(x[24], 0.0);
        assert_eq!(x[25], 5.0);
        // Unconditioned variant zeroes the goal slots.
        let x0 = encoder_input(&h, None);
        assert_eq!(x0[24], 0.0);
        assert_eq!(x0[25], 0.0);
    }

    #[test]
    fn max_pool_tracks_argmax() {
        let e = vec![vec![1.0, -2.0], vec![0.5, 3.0]];
        let (pooled, arg) = max_pool(&e, 2);
        assert_eq!(pooled, vec![1.0, 3.0]);
        assert_eq!(arg, vec![0, 1]);
        let (empty, _) = max_pool(&[], 2);
        assert_eq!(empty, vec![0.0, 0.0]);
    }

    #[test]
    fn dot_matches_naive() {
        let a: Vec<f64> = (0..13).map(|i| i as f64 * 0.5).collect();
        let b: Vec<f64> = (0..13).map(|i| 1.0 - i as f64 * 0.25).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-12);
    }
}
