//! Evaluation metrics over episode logs.

use crate::bench::runner::{EpisodeLog, Outcome};
use serde::{Deserialize, Serialize};

/// Collision metric thresholds (center distance, meters). These differ from
/// the 0.2 m episode-termination distance on purpose: termination and
/// metric accounting follow their own definitions.
pub const COLL_NEAR: f64 = 0.21;
pub const COLL_WIDE: f64 = 0.31;

/// Freezing-behavior path-length ratio threshold.
pub const FB_RATIO: f64 = 1.25;

/// Metric values, all percentages except `max_fb` which is the largest
/// robot/human path-length ratio expressed as a percentage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub success: f64,
    pub coll_21: f64,
    pub coll_31: f64,
    pub timeout: f64,
    pub fb: f64,
    pub max_fb: f64,
    pub episodes: usize,
}

impl MetricSet {
    pub fn zeros() -> Self {
        MetricSet {
            success: 0.0,
            coll_21: 0.0,
            coll_31: 0.0,
            timeout: 0.0,
            fb: 0.0,
            max_fb: 0.0,
            episodes: 0,
        }
    }

    /// Mean over several metric sets (used to aggregate repeats).
    pub fn mean(sets: &[MetricSet]) -> MetricSet {
        if sets.is_empty() {
            return MetricSet::zeros();
        }
        let n = sets.len() as f64;
        MetricSet {
            success: sets.iter().map(|m| m.success).sum::<f64>() / n,
            coll_21: sets.iter().map(|m| m.coll_21).sum::<f64>() / n,
            coll_31: sets.iter().map(|m| m.coll_31).sum::<f64>() / n,
            timeout: sets.iter().map(|m| m.timeout).sum::<f64>() / n,
            fb: sets.iter().map(|m| m.fb).sum::<f64>() / n,
            max_fb: sets.iter().map(|m| m.max_fb).sum::<f64>() / n,
            episodes: sets.iter().map(|m| m.episodes).sum(),
        }
    }
}

/// Compute the metric set over a batch of episodes.
///
/// Timed-out episodes never reached the goal, so their truncated paths are
/// excluded from the freezing-behavior ratios.
pub fn compute_metrics(episodes: &[EpisodeLog]) -> MetricSet {
    let n = episodes.len();
    if n == 0 {
        return MetricSet::zeros();
    }
    let pct = |count: usize| 100.0 * count as f64 / n as f64;

    let success = episodes.iter().filter(|e| e.outcome == Outcome::Success).count();
    let timeout = episodes.iter().filter(|e| e.outcome == Outcome::Timeout).count();
    let coll21 = episodes
        .iter()
        .filter(|e| e.min_human_distance < COLL_NEAR)
        .count();
    let coll31 = episodes
        .iter()
        .filter(|e| e.min_human_distance < COLL_WIDE)
        .count();

    let mut fb = 0usize;
    let mut max_fb = 0.0f64;
    for e in episodes {
        if e.outcome == Outcome::Timeout || e.human_path_length <= 0.0 {
            continue;
        }
        let ratio = e.robot_path_length / e.human_path_length;
        if ratio > FB_RATIO {
            fb += 1;
        }
        max_fb = max_fb.max(ratio * 100.0);
    }

    MetricSet {
        success: pct(success),
        coll_21: pct(coll21),
        coll_31: pct(coll31),
        timeout: pct(timeout),
        fb: pct(fb),
        max_fb,
        episodes: n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec2::Vec2;

    fn episode(outcome: Outcome, min_d: f64, robot_len: f64, human_len: f64) -> EpisodeLog {
        EpisodeLog {
            scene_index: 0,
            repeat: 0,
            outcome,
            robot_path: vec![Vec2::ZERO],
            commands: Vec::new(),
            min_human_distance: min_d,
            robot_path_length: robot_len,
            human_path_length: human_len,
            duration: 10.0,
        }
    }

    #[test]
    fn thresholds_are_exact() {
        // 0.25 m minimum distance: wide collision yes, near collision no.
        let eps = vec![episode(Outcome::Success, 0.25, 10.0, 10.0)];
        let m = compute_metrics(&eps);
        assert_eq!(m.coll_21, 0.0);
        assert_eq!(m.coll_31, 100.0);
        assert_eq!(m.success, 100.0);
        assert_eq!(m.timeout, 0.0);
    }

    #[test]
    fn fb_ratio_threshold() {
        let eps = vec![
            episode(Outcome::Success, 1.0, 12.6, 10.0), // ratio 1.26 -> FB
            episode(Outcome::Success, 1.0, 10.0, 10.0), // ratio 1.00 -> no
            episode(Outcome::Success, 1.0, 12.5, 10.0), // ratio 1.25 -> not strictly longer
            episode(Outcome::Timeout, 1.0, 50.0, 10.0), // excluded
        ];
        let m = compute_metrics(&eps);
        assert_eq!(m.fb, 25.0);
        assert!((m.max_fb - 126.0).abs() < 1e-9);
        assert_eq!(m.timeout, 25.0);
    }

    #[test]
    fn hand_built_mix() {
        let eps = vec![
            episode(Outcome::Success, 0.5, 9.0, 10.0),
            episode(Outcome::Collision, 0.15, 4.0, 10.0),
            episode(Outcome::Timeout, 0.22, 3.0, 10.0),
            episode(Outcome::Success, 0.205, 11.0, 10.0),
        ];
        let m = compute_metrics(&eps);
        assert_eq!(m.success, 50.0);
        assert_eq!(m.timeout, 25.0);
        // min distances below 0.21: the collision episode and the 0.205 one.
        assert_eq!(m.coll_21, 50.0);
        // below 0.31: those two plus the 0.22 timeout.
        assert_eq!(m.coll_31, 75.0);
        assert_eq!(m.episodes, 4);
    }

    #[test]
    fn empty_input() {
        assert_eq!(compute_metrics(&[]), MetricSet::zeros());
    }

    #[test]
    fn mean_over_repeats() {
        let a = MetricSet {
            success: 100.0,
            coll_21: 0.0,
            coll_31: 0.0,
            timeout: 0.0,
            fb: 0.0,
            max_fb: 110.0,
            episodes: 2,
        };
        let b = MetricSet {
            success: 50.0,
            coll_21: 50.0,
            coll_31: 50.0,
            timeout: 50.0,
            fb: 100.0,
            max_fb: 130.0,
            episodes: 2,
        };
        let m = MetricSet::mean(&[a, b]);
        assert_eq!(m.success, 75.0);
        assert_eq!(m.coll_21, 25.0);
        assert_eq!(m.fb, 50.0);
        assert_eq!(m.max_fb, 120.0);
        assert_eq!(m.episodes, 4);
    }
}
