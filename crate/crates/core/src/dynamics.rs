//! Robot and human transition functions, polar/Cartesian conversion and
//! dynamic-window action clipping.

use crate::scene::{wrap_angle, KinematicsConfig, RobotState};
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};

/// Robot action as linear and angular velocity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PolarAction {
    pub linear: f64,
    pub angular: f64,
}

impl PolarAction {
    pub fn new(linear: f64, angular: f64) -> Self {
        PolarAction { linear, angular }
    }

    pub fn is_finite(&self) -> bool {
        self.linear.is_finite() && self.angular.is_finite()
    }
}

/// Displacement over one step in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CartesianAction {
    pub displacement: Vec2,
}

/// Admissible velocity intervals for the next step: the intersection of the
/// robot's absolute limits with the one-step reachable band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityWindow {
    pub linear: (f64, f64),
    pub angular: (f64, f64),
}

impl VelocityWindow {
    pub fn contains(&self, a: PolarAction) -> bool {
        a.linear >= self.linear.0
            && a.linear <= self.linear.1
            && a.angular >= self.angular.0
            && a.angular <= self.angular.1
    }
}

/// Intersect an absolute limit interval with a reachable interval. An empty
/// intersection collapses to the absolute bound nearest the reachable band,
/// which cannot happen with consistent configs but must be defined for
/// arbitrary ones.
fn intersect(limit: (f64, f64), reach: (f64, f64)) -> (f64, f64) {
    let lo = limit.0.max(reach.0);
    let hi = limit.1.min(reach.1);
    if lo <= hi {
        (lo, hi)
    } else if reach.0 > limit.1 {
        (limit.1, limit.1)
    } else {
        (limit.0, limit.0)
    }
}

/// Range of velocities achievable in the next time step: the intersection of
/// the platform limits with `current +- accel * dt` per axis.
pub fn velocity_window(current: (f64, f64), cfg: &KinematicsConfig, dt: f64) -> VelocityWindow {
    assert!(dt > 0.0, "dt must be positive");
    let (v, w) = current;
    VelocityWindow {
        linear: intersect(
            (cfg.min_linear, cfg.max_linear),
            (v - cfg.max_linear_accel * dt, v + cfg.max_linear_accel * dt),
        ),
        angular: intersect(
            (-cfg.max_angular, cfg.max_angular),
            (
                w - cfg.max_angular_accel * dt,
                w + cfg.max_angular_accel * dt,
            ),
        ),
    }
}

/// Clip a robot action into the dynamic window for the current velocity.
/// Idempotent: clipping a clipped action is a no-op.
pub fn dynamic_window_clip(
    action: PolarAction,
    current: (f64, f64),
    cfg: &KinematicsConfig,
    dt: f64,
) -> PolarAction {
    let win = velocity_window(current, cfg, dt);
    PolarAction {
        linear: action.linear.clamp(win.linear.0, win.linear.1),
        angular: action.angular.clamp(win.angular.0, win.angular.1),
    }
}

/// Advance the robot one step: integrate heading first, then translate along
/// the new heading (turn-then-move discretization, so a pure rotation
/// produces zero displacement). Stored velocities become the commanded
/// action.
pub fn robot_step(state: &RobotState, action: PolarAction, dt: f64) -> (RobotState, CartesianAction) {
    let heading = wrap_angle(state.heading + action.angular * dt);
    let displacement = Vec2::from_angle(heading) * (action.linear * dt);
    (
        RobotState {
            position: state.position + displacement,
            heading,
            linear_velocity: action.linear,
            angular_velocity: action.angular,
        },
        CartesianAction { displacement },
    )
}

/// Human transition: next position is the current position plus the action
/// displacement.
pub fn human_step(position: Vec2, action: Vec2) -> Vec2 {
    position + action
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng_from_seed;
    use rand::Rng;

    fn locobot() -> KinematicsConfig {
        KinematicsConfig::default()
    }

    #[test]
    fn window_from_rest() {
        let w = velocity_window((0.0, 0.0), &locobot(), 0.4);
        assert_eq!(w.linear, (0.0, 0.2));
        assert_eq!(w.angular, (-1.0, 1.0));
    }

    #[test]
    fn window_at_top_speed() {
        let w = velocity_window((0.7, 0.0), &locobot(), 0.4);
        assert!((w.linear.0 - 0.5).abs() < 1e-12);
        assert_eq!(w.linear.1, 0.7);
    }

    #[test]
    fn window_degenerate_with_zero_accel() {
        let cfg = KinematicsConfig {
            max_linear_accel: 1e-300,
            max_angular_accel: 1e-300,
            ..locobot()
        };
        let w = velocity_window((0.3, 0.1), &cfg, 0.4);
        assert!((w.linear.0 - 0.3).abs() < 1e-12 && (w.linear.1 - 0.3).abs() < 1e-12);
        assert!((w.angular.0 - 0.1).abs() < 1e-12 && (w.angular.1 - 0.1).abs() < 1e-12);
    }

    #[test]
    fn clip_examples() {
        let cfg = locobot();
        let from_rest = (0.0, 0.0);
        assert_eq!(
            dynamic_window_clip(PolarAction::new(0.7, 0.0), from_rest, &cfg, 0.4),
            PolarAction::new(0.2, 0.0)
        );
        assert_eq!(
            dynamic_window_clip(PolarAction::new(0.1, 0.0), from_rest, &cfg, 0.4),
            PolarAction::new(0.1, 0.0)
        );
        assert_eq!(
            dynamic_window_clip(PolarAction::new(-0.5, 0.0), from_rest, &cfg, 0.4),
            PolarAction::new(0.0, 0.0)
        );
    }

    #[test]
    fn clip_idempotent_and_in_window_randomized() {
        let cfg = locobot();
        let mut rng = rng_from_seed(11);
        for _ in 0..2000 {
            let current = (rng.gen_range(-1.0..1.5), rng.gen_range(-2.0..2.0));
            let a = PolarAction::new(rng.gen_range(-3.0..3.0), rng.gen_range(-6.0..6.0));
            let c = dynamic_window_clip(a, current, &cfg, 0.4);
            assert!(velocity_window(current, &cfg, 0.4).contains(c));
            assert_eq!(dynamic_window_clip(c, current, &cfg, 0.4), c);
        }
    }

    #[test]
    fn robot_step_examples() {
        let s = RobotState::new(Vec2::ZERO, 0.0, 0.0, 0.0);
        let (s1, a1) = robot_step(&s, PolarAction::new(0.5, 0.0), 0.4);
        assert_eq!(a1.displacement, Vec2::new(0.2, 0.0));
        assert_eq!(s1.position, Vec2::new(0.2, 0.0));

        let (s2, a2) = robot_step(&s, PolarAction::new(0.0, 1.0), 0.4);
        assert_eq!(a2.displacement, Vec2::ZERO);
        assert!((s2.heading - 0.4).abs() < 1e-15);

        // Quarter turn in one step, then translate along the new heading.
        let (s3, a3) = robot_step(&s, PolarAction::new(0.5, std::f64::consts::PI / 0.8), 0.4);
        assert!((s3.heading - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!(a3.displacement.x.abs() < 1e-12);
        assert!((a3.displacement.y - 0.2).abs() < 1e-12);
    }

    #[test]
    fn robot_step_preserves_speed() {
        let mut rng = rng_from_seed(5);
        for _ in 0..500 {
            let s = RobotState::new(
                Vec2::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)),
                rng.gen_range(-3.0..3.0),
                0.0,
                0.0,
            );
            let a = PolarAction::new(rng.gen_range(-1.0..1.0), rng.gen_range(-2.0..2.0));
            let (_, c) = robot_step(&s, a, 0.4);
            assert!((c.displacement.norm() - a.linear.abs() * 0.4).abs() < 1e-12);
        }
    }

    #[test]
    fn straight_motion_collinear() {
        let mut s = RobotState::new(Vec2::new(1.0, -2.0), 0.7, 0.0, 0.0);
        let dir = Vec2::from_angle(0.7);
        for _ in 0..20 {
            let (next, _) = robot_step(&s, PolarAction::new(0.3, 0.0), 0.4);
            s = next;
            let offset = s.position - Vec2::new(1.0, -2.0);
            let cross = offset.x * dir.y - offset.y * dir.x;
            assert!(cross.abs() < 1e-12);
        }
    }

    #[test]
    fn human_step_examples() {
        assert_eq!(human_step(Vec2::ZERO, Vec2::ZERO), Vec2::ZERO);
        assert_eq!(
            human_step(Vec2::new(1.0, 2.0), Vec2::new(0.3, -0.1)),
            Vec2::new(1.3, 1.9)
        );
        let mut p = Vec2::ZERO;
        for _ in 0..12 {
            p = human_step(p, Vec2::new(0.1, 0.0));
        }
        assert!((p.x - 1.2).abs() < 1e-12 && p.y == 0.0);
    }
}
