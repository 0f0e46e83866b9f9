//! Hindsight-relabeled window construction from resampled tracks.
//!
//! Every 20-step span (8 observed + 12 future, sliding by one step) yields
//! one multi-agent window. Agents fully present over the span become
//! prediction targets with the final state relabeled as their goal; agents
//! present at the anchor step but not over the whole span enter as context
//! only, with zero-padded observations.

use crate::predictor::{HerAgent, HerContext, HerWindow};
use crate::scene::{AgentHistory, AgentTrack};
use crate::vec2::Vec2;
use crate::{HORIZON, OBS_STEPS};

const SPAN: usize = OBS_STEPS + HORIZON;

/// Grid coverage interval of one track.
fn coverage(track: &AgentTrack) -> Option<(i64, i64)> {
    if track.samples.is_empty() {
        return None;
    }
    let start = track.grid_start();
    Some((start, start + track.samples.len() as i64 - 1))
}

pub fn build_her_windows(tracks: &[AgentTrack]) -> Vec<HerWindow> {
    let spans: Vec<(usize, i64, i64)> = tracks
        .iter()
        .enumerate()
        .filter_map(|(i, t)| coverage(t).map(|(a, b)| (i, a, b)))
        .collect();
    if spans.is_empty() {
        return Vec::new();
    }
    let lo = spans.iter().map(|(_, a, _)| *a).min().unwrap();
    let hi = spans.iter().map(|(_, _, b)| *b).max().unwrap();
    if hi - lo + 1 < SPAN as i64 {
        return Vec::new();
    }

    let mut windows = Vec::new();
    for start in lo..=(hi - SPAN as i64 + 1) {
        let anchor = start + OBS_STEPS as i64 - 1;
        let end = start + SPAN as i64 - 1;

        let mut agents = Vec::new();
        let mut context = Vec::new();
        for (idx, t0, t1) in &spans {
            let track = &tracks[*idx];
            if *t0 <= start && end <= *t1 {
                // Fully present: a prediction target.
                let hist: Vec<Vec2> = (start..=anchor)
                    .map(|g| track.at_grid(g).unwrap())
                    .collect();
                let mut actions = [Vec2::ZERO; HORIZON];
                let mut states = [Vec2::ZERO; HORIZON];
                let mut prev = track.at_grid(anchor).unwrap();
                for (i, g) in ((anchor + 1)..=end).enumerate() {
                    let pos = track.at_grid(g).unwrap();
                    actions[i] = pos - prev;
                    states[i] = pos;
                    prev = pos;
                }
                agents.push(HerAgent {
                    agent_id: track.agent_id,
                    history: AgentHistory::from_recent(track.agent_id, &hist),
                    actions,
                    states,
                    goal: states[HORIZON - 1],
                });
            } else if *t0 <= anchor && anchor <= *t1 {
                // Present now but not over the whole span: context only.
                let hist: Vec<Vec2> = (start.max(*t0)..=anchor)
                    .map(|g| track.at_grid(g).unwrap())
                    .collect();
                let mut future = [None; HORIZON];
                for (i, g) in ((anchor + 1)..=end).enumerate() {
                    future[i] = track.at_grid(g);
                }
                context.push(HerContext {
                    agent_id: track.agent_id,
                    history: AgentHistory::from_recent(track.agent_id, &hist),
                    future,
                });
            }
        }
        if !agents.is_empty() {
            windows.push(HerWindow {
                anchor,
                agents,
                context,
            });
        }
    }
    windows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DT;

    fn straight_track(id: i64, start_index: i64, steps: usize, vel: Vec2) -> AgentTrack {
        let samples = (0..steps)
            .map(|i| {
                let t = (start_index + i as i64) as f64 * DT;
                (t, vel * (i as f64 * DT))
            })
            .collect();
        AgentTrack::new(id, samples)
    }

    #[test]
    fn constant_velocity_window() {
        // 1 m/s along +x: 0.4 m per step.
        let tracks = vec![straight_track(0, 0, SPAN, Vec2::new(1.0, 0.0))];
        let windows = build_her_windows(&tracks);
        assert_eq!(windows.len(), 1);
        let w = &windows[0];
        assert_eq!(w.agents.len(), 1);
        let a = &w.agents[0];
        for act in &a.actions {
            assert!((act.x - 0.4).abs() < 1e-12 && act.y.abs() < 1e-12);
        }
        // Goal is the final state: 19 steps of 0.4 m from the track origin.
        assert!((a.goal.x - 19.0 * 0.4).abs() < 1e-12);
        assert_eq!(a.goal, a.states[HORIZON - 1]);
        // Actions are exact first differences of states.
        assert_eq!(a.states[0], a.history.current() + a.actions[0]);
        for i in 1..HORIZON {
            assert_eq!(a.states[i], a.states[i - 1] + a.actions[i]);
        }
    }

    #[test]
    fn stationary_window() {
        let samples = (0..SPAN)
            .map(|i| (i as f64 * DT, Vec2::new(2.0, -1.0)))
            .collect();
        let tracks = vec![AgentTrack::new(3, samples)];
        let windows = build_her_windows(&tracks);
        assert_eq!(windows.len(), 1);
        let a = &windows[0].agents[0];
        assert!(a.actions.iter().all(|v| *v == Vec2::ZERO));
        assert_eq!(a.goal, Vec2::new(2.0, -1.0));
    }

    #[test]
    fn short_track_produces_no_window() {
        let tracks = vec![straight_track(0, 0, SPAN - 1, Vec2::new(1.0, 0.0))];
        assert!(build_her_windows(&tracks).is_empty());
        assert!(build_her_windows(&[]).is_empty());
    }

    #[test]
    fn sliding_spans_and_context_agents() {
        // Agent 0 covers 25 steps: 25 - 20 + 1 = 6 windows.
        // Agent 1 covers only the first 12 steps: context where present at
        // the anchor, never a target.
        let tracks = vec![
            straight_track(0, 0, 25, Vec2::new(1.0, 0.0)),
            straight_track(1, 0, 12, Vec2::new(0.0, 1.0)),
        ];
        let windows = build_her_windows(&tracks);
        assert_eq!(windows.len(), 6);
        for w in &windows {
            assert_eq!(w.agents.len(), 1);
            assert_eq!(w.agents[0].agent_id, 0);
        }
        // First window anchor = step 7 < 12: agent 1 is context there.
        assert_eq!(windows[0].context.len(), 1);
        let ctx = &windows[0].context[0];
        assert_eq!(ctx.agent_id, 1);
        assert_eq!(ctx.history.valid_count(), OBS_STEPS);
        // Its future runs out after step 11: indices 8..11 present (4 steps).
        assert_eq!(ctx.future.iter().filter(|f| f.is_some()).count(), 4);
        // Anchor 12 onward: agent 1 has left the scene.
        assert!(windows[5].context.is_empty());
    }

    #[test]
    fn context_history_padded_at_oldest_end() {
        let tracks = vec![
            straight_track(0, 0, SPAN, Vec2::new(1.0, 0.0)),
            // Appears at grid step 4: only 4 of 8 observation steps exist.
            straight_track(1, 4, 10, Vec2::new(0.0, 1.0)),
        ];
        let windows = build_her_windows(&tracks);
        let ctx = &windows[0].context[0];
        assert_eq!(ctx.history.valid_count(), 4);
        assert!(!ctx.history.valid[0] && ctx.history.valid[4]);
    }
}
