//! Scene construction: slice resampled tracks into non-overlapping 50-step
//! windows, designate a qualifying human per window, and mask its states
//! from the observations after the observed prefix.

use crate::scene::{AgentTrack, RobotState};
use crate::seeding::stream_rng;
use crate::vec2::Vec2;
use crate::{DT, OBS_STEPS};
use rand::Rng;

/// Steps per scene: 20 seconds at 0.4 s.
pub const SCENE_STEPS: usize = 50;

/// Minimum start-to-goal displacement for a designated human, meters.
pub const MIN_DESIGNATED_DISPLACEMENT: f64 = 8.0;

/// One benchmark scene: 50 frames of visible human positions, the
/// designated human's reference path, and the robot start/goal derived
/// from it.
#[derive(Debug, Clone)]
pub struct BenchScene {
    /// Global grid index of frame 0.
    pub start_index: i64,
    /// Visible humans per frame. The designated human never appears here:
    /// the robot replaces it, inheriting its observed prefix as history.
    pub frames: Vec<Vec<(i64, Vec2)>>,
    pub designated_id: i64,
    /// The designated human's full 50-step path (metrics reference and the
    /// robot's seed history).
    pub designated_path: Vec<Vec2>,
    pub robot_start: RobotState,
    pub robot_goal: Vec2,
}

/// Scenes plus protocol accounting.
#[derive(Debug, Clone)]
pub struct SceneSet {
    pub scenes: Vec<BenchScene>,
    /// Windows with no qualifying human.
    pub skipped: usize,
}

/// Robot takeover state: the designated human's pose at the last observed
/// step, with speed clamped into the platform band.
fn takeover_state(path: &[Vec2], max_linear: f64, min_linear: f64) -> RobotState {
    let cur = path[OBS_STEPS - 1];
    let prev = path[OBS_STEPS - 2];
    let disp = cur - prev;
    let heading = if disp.norm() > 1e-9 { disp.angle() } else { 0.0 };
    let speed = (disp.norm() / DT).clamp(min_linear, max_linear);
    RobotState::new(cur, heading, speed, 0.0)
}

pub fn make_scenes(tracks: &[AgentTrack], seed: u64) -> SceneSet {
    let coverage: Vec<(usize, i64, i64)> = tracks
        .iter()
        .enumerate()
        .filter(|(_, t)| !t.samples.is_empty())
        .map(|(i, t)| {
            let s = t.grid_start();
            (i, s, s + t.samples.len() as i64 - 1)
        })
        .collect();
    if coverage.is_empty() {
        return SceneSet {
            scenes: Vec::new(),
            skipped: 0,
        };
    }
    let lo = coverage.iter().map(|(_, a, _)| *a).min().unwrap();
    let hi = coverage.iter().map(|(_, _, b)| *b).max().unwrap();

    let mut scenes = Vec::new();
    let mut skipped = 0usize;
    let mut window = 0u64;
    let mut start = lo;
    while start + SCENE_STEPS as i64 - 1 <= hi {
        let end = start + SCENE_STEPS as i64 - 1;
        // Fully visible humans that move far enough.
        let mut candidates: Vec<usize> = coverage
            .iter()
            .filter(|(_, a, b)| *a <= start && end <= *b)
            .map(|(i, _, _)| *i)
            .filter(|i| {
                let t = &tracks[*i];
                let p0 = t.at_grid(start).unwrap();
                let p1 = t.at_grid(end).unwrap();
                p0.dist(p1) >= MIN_DESIGNATED_DISPLACEMENT
            })
            .collect();
        candidates.sort_by_key(|i| tracks[*i].agent_id);

        if candidates.is_empty() {
            skipped += 1;
        } else {
            let mut rng = stream_rng(seed, window);
            let pick = candidates[rng.gen_range(0..candidates.len())];
            let designated = &tracks[pick];
            let designated_path: Vec<Vec2> = (start..=end)
                .map(|g| designated.at_grid(g).unwrap())
                .collect();

            // The robot replaces the designated human: its observed prefix
            // becomes the robot's own history, so the human never appears
            // as a separate agent in any frame.
            let frames: Vec<Vec<(i64, Vec2)>> = (0..SCENE_STEPS)
                .map(|s| {
                    let g = start + s as i64;
                    tracks
                        .iter()
                        .filter(|t| t.agent_id != designated.agent_id)
                        .filter_map(|t| t.at_grid(g).map(|p| (t.agent_id, p)))
                        .collect()
                })
                .collect();

            let robot_start = takeover_state(&designated_path, 0.7, 0.0);
            scenes.push(BenchScene {
                start_index: start,
                frames,
                designated_id: designated.agent_id,
                designated_path: designated_path.clone(),
                robot_start,
                robot_goal: designated_path[SCENE_STEPS - 1],
            });
        }
        start += SCENE_STEPS as i64;
        window += 1;
    }

    SceneSet { scenes, skipped }
}

impl BenchScene {
    /// Visible humans at a scene-relative step (empty past the recording).
    pub fn humans_at(&self, step: usize) -> &[(i64, Vec2)] {
        if step < self.frames.len() {
            &self.frames[step]
        } else {
            &[]
        }
    }

    /// Path length of the designated human over the whole scene.
    pub fn designated_path_length(&self) -> f64 {
        self.designated_path
            .windows(2)
            .map(|w| w[0].dist(w[1]))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn straight_track(id: i64, start: i64, steps: usize, vel: Vec2, origin: Vec2) -> AgentTrack {
        AgentTrack::new(
            id,
            (0..steps)
                .map(|i| {
                    let t = (start + i as i64) as f64 * DT;
                    (t, origin + vel * (i as f64 * DT))
                })
                .collect(),
        )
    }

    #[test]
    fn designates_moving_human_and_masks_it() {
        // 0.5 m/s * 49 steps * 0.4 s = 9.8 m displacement: qualifies.
        let mover = straight_track(1, 0, SCENE_STEPS, Vec2::new(0.5, 0.0), Vec2::ZERO);
        let idler = straight_track(2, 0, SCENE_STEPS, Vec2::ZERO, Vec2::new(3.0, 3.0));
        let set = make_scenes(&[mover, idler], 5);
        assert_eq!(set.scenes.len(), 1);
        assert_eq!(set.skipped, 0);
        let s = &set.scenes[0];
        assert_eq!(s.designated_id, 1);
        assert!((s.robot_goal.x - 9.8).abs() < 1e-9);
        // The designated human is replaced by the robot everywhere; other
        // humans replay untouched.
        for frame in s.frames.iter() {
            assert!(!frame.iter().any(|(id, _)| *id == 1));
            assert!(frame.iter().any(|(id, _)| *id == 2));
        }
        // Its observed prefix survives as the robot's seed history.
        assert_eq!(s.designated_path[OBS_STEPS - 1], s.robot_start.position);
        // Start-goal at least 8 m apart.
        assert!(s.robot_start.position.dist(s.robot_goal) >= 7.0);
    }

    #[test]
    fn scene_without_qualifying_human_is_skipped_and_counted() {
        let slow = straight_track(1, 0, SCENE_STEPS, Vec2::new(0.1, 0.0), Vec2::ZERO);
        let set = make_scenes(&[slow], 5);
        assert!(set.scenes.is_empty());
        assert_eq!(set.skipped, 1);
    }

    #[test]
    fn same_seed_gives_identical_scenes() {
        let tracks: Vec<AgentTrack> = (0..4)
            .map(|i| {
                straight_track(
                    i,
                    0,
                    SCENE_STEPS,
                    Vec2::new(0.5, 0.05 * i as f64),
                    Vec2::new(0.0, i as f64),
                )
            })
            .collect();
        let a = make_scenes(&tracks, 9);
        let b = make_scenes(&tracks, 9);
        assert_eq!(a.scenes.len(), b.scenes.len());
        for (x, y) in a.scenes.iter().zip(b.scenes.iter()) {
            assert_eq!(x.designated_id, y.designated_id);
            assert_eq!(x.robot_goal, y.robot_goal);
        }
    }

    #[test]
    fn windows_are_non_overlapping_consecutive_blocks() {
        let long = straight_track(1, 0, 3 * SCENE_STEPS + 10, Vec2::new(0.5, 0.0), Vec2::ZERO);
        let set = make_scenes(&[long], 1);
        assert_eq!(set.scenes.len(), 3);
        for (i, s) in set.scenes.iter().enumerate() {
            assert_eq!(s.start_index, (i * SCENE_STEPS) as i64);
        }
    }

    #[test]
    fn takeover_speed_clamped_to_platform() {
        // 2 m/s human: takeover speed clamps to 0.7.
        let sprinter = straight_track(1, 0, SCENE_STEPS, Vec2::new(2.0, 0.0), Vec2::ZERO);
        let set = make_scenes(&[sprinter], 2);
        assert_eq!(set.scenes[0].robot_start.linear_velocity, 0.7);
        assert_eq!(set.scenes[0].robot_start.heading, 0.0);
    }
}
