use crate::domain::{RobotAction, ScenarioConfig, ScenarioKind, WorldState};
use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Robot lane relative to the human's path.
///
/// Intersection and lane-merge scenarios are always `Shared`. Lane-switch
/// episodes start `Clear` (own lane, no conflict), enter `Switching` on
/// SwitchLeft and become `Shared` once the maneuver completes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LaneStatus {
    Clear,
    Switching { remaining: usize },
    Shared,
}

impl LaneStatus {
    pub fn conflicts(self) -> bool {
        self != LaneStatus::Clear
    }
}

/// Signed positions relative to the colliding point: positive before it,
/// negative after passing. A vehicle occupies the zone while its position
/// lies in `(-L, 0]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficState {
    pub pos_h: f64,
    pub pos_r: f64,
    pub v_h: f64,
    pub v_r: f64,
    pub lane: LaneStatus,
    /// Lead of the merge point ahead of the robot while in its own lane.
    pub merge_lead: f64,
}

impl TrafficState {
    pub fn initial(cfg: &ScenarioConfig, x: WorldState) -> TrafficState {
        TrafficState {
            pos_h: x.d_h,
            pos_r: x.d_r,
            v_h: x.v_h,
            v_r: x.v_r,
            lane: if cfg.kind == ScenarioKind::LaneSwitch {
                LaneStatus::Clear
            } else {
                LaneStatus::Shared
            },
            merge_lead: x.d_r,
        }
    }

    pub fn sample<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> TrafficState {
        let mut draw = |r: crate::domain::Interval| rng.gen_range(r.lo..=r.hi);
        let x = WorldState {
            d_h: draw(cfg.d_h),
            d_r: draw(cfg.d_r),
            v_h: draw(cfg.v_h),
            v_r: draw(cfg.v_r),
        };
        TrafficState::initial(cfg, x)
    }

    /// Observable world state; distances are clamped at zero once a car
    /// reaches the colliding point.
    pub fn world(&self) -> WorldState {
        WorldState {
            d_h: self.pos_h.max(0.0),
            d_r: self.pos_r.max(0.0),
            v_h: self.v_h,
            v_r: self.v_r,
        }
    }

    pub fn human_cleared(&self, length: f64) -> bool {
        self.pos_h <= -length
    }

    pub fn robot_cleared(&self, length: f64) -> bool {
        self.pos_r <= -length
    }

    /// The robot has crossed the colliding point on the human's path.
    pub fn goal_reached(&self, length: f64) -> bool {
        self.lane.conflicts() && self.robot_cleared(length)
    }

    /// Both cars inside the zone on a conflicting path.
    pub fn co_occupied(&self, length: f64) -> bool {
        let inside = |p: f64| p <= 0.0 && p > -length;
        self.lane.conflicts() && inside(self.pos_h) && inside(self.pos_r)
    }
}

/// Time-measured-to-collision in seconds; infinite without a conflict.
pub fn tmtc(s: &TrafficState, length: f64) -> f64 {
    if !s.lane.conflicts() {
        return f64::INFINITY;
    }
    tmtc_positions(s.pos_h, s.v_h, s.pos_r, s.v_r, length)
}

/// TMTC from signed positions on a shared conflict path.
pub fn tmtc_positions(pos_h: f64, v_h: f64, pos_r: f64, v_r: f64, length: f64) -> f64 {
    let (Some((s1, e1)), Some((s2, e2))) = (
        occupancy(pos_h, v_h, length),
        occupancy(pos_r, v_r, length),
    ) else {
        return f64::INFINITY;
    };
    let start = s1.max(s2);
    if start < e1.min(e2) {
        start
    } else {
        f64::INFINITY
    }
}

/// Zone occupancy interval at constant speed, or `None` if never inside.
fn occupancy(pos: f64, v: f64, length: f64) -> Option<(f64, f64)> {
    if pos <= -length {
        return None;
    }
    if v <= 0.0 {
        return if pos > 0.0 {
            None
        } else {
            Some((0.0, f64::INFINITY))
        };
    }
    Some((pos.max(0.0) / v, (pos + length) / v))
}

/// Semi-implicit longitudinal update of a single vehicle.
pub fn step_vehicle(pos: f64, v: f64, a: f64, dt: f64, v_max: f64) -> (f64, f64) {
    let v2 = (v + a * dt).clamp(0.0, v_max);
    (pos - v2 * dt, v2)
}

/// Kinematic step on the clamped world state, both cars on fixed paths.
pub fn step_dynamics(x: &WorldState, a_r: f64, a_h: f64, dt: f64, v_max: f64) -> Result<WorldState> {
    if !(dt > 0.0) {
        return Err(Error::Config(format!("dt = {dt} must be positive")));
    }
    let (d_h, v_h) = step_vehicle(x.d_h, x.v_h, a_h, dt, v_max);
    let (d_r, v_r) = step_vehicle(x.d_r, x.v_r, a_r, dt, v_max);
    Ok(WorldState {
        d_h: d_h.max(0.0),
        d_r: d_r.max(0.0),
        v_h,
        v_r,
    })
}

/// Resolves the lane transition requested by `action`.
pub fn apply_lane_switch(s: &TrafficState, action: RobotAction, steps: usize) -> Result<TrafficState> {
    let mut next = *s;
    match (s.lane, action) {
        (_, RobotAction::Decelerate | RobotAction::Keep | RobotAction::Accelerate) => {}
        (LaneStatus::Switching { .. }, _) => {
            return Err(Error::InvalidAction(
                "lane switch requested while a switch is in progress".into(),
            ))
        }
        (LaneStatus::Clear, RobotAction::SwitchLeft) => {
            next.lane = LaneStatus::Switching { remaining: steps };
        }
        (LaneStatus::Shared, RobotAction::SwitchRight) => {
            // Back to the own lane: the merge point again rides ahead of the
            // robot, the human keeps its offset to the robot.
            next.pos_h = s.pos_h - s.pos_r + s.merge_lead;
            next.pos_r = s.merge_lead;
            next.lane = LaneStatus::Clear;
        }
        (LaneStatus::Clear, RobotAction::SwitchRight) | (LaneStatus::Shared, RobotAction::SwitchLeft) => {
            return Err(Error::InvalidAction(format!(
                "no target lane for {} from {:?}",
                action, s.lane
            )))
        }
    }
    Ok(next)
}

/// Acceleration the robot action exerts in the conflict frame, which is
/// what histories record. In its own lane the robot's speed does not
/// change its distance to the merge point, so longitudinal actions read as
/// zero there; entering the human's lane reads as accelerating toward the
/// conflict and leaving it as decelerating away.
pub fn conflict_frame_accel(s: &TrafficState, action: RobotAction, accel: f64) -> f64 {
    match (s.lane, action) {
        (_, RobotAction::SwitchLeft) => accel,
        (_, RobotAction::SwitchRight) => -accel,
        (LaneStatus::Clear, _) => 0.0,
        (_, a) => a.longitudinal_accel(accel),
    }
}

/// One full simulator step. Returns the successor and whether the two cars
/// shared the zone at any instant of the step.
pub fn step_traffic(
    cfg: &ScenarioConfig,
    s: &TrafficState,
    action: RobotAction,
    a_h: f64,
) -> Result<(TrafficState, bool)> {
    action.check_allowed(cfg.kind)?;
    if !a_h.is_finite() {
        return Err(Error::InvalidAction(format!("human acceleration {a_h}")));
    }
    let mut next = apply_lane_switch(s, action, cfg.geometry.lane_change_steps)?;
    let a_r = action.longitudinal_accel(cfg.robot_accel);
    let start = next;
    let (pos_h, v_h) = step_vehicle(next.pos_h, next.v_h, a_h, cfg.dt, cfg.v_max);
    let (pos_r, v_r) = step_vehicle(next.pos_r, next.v_r, a_r, cfg.dt, cfg.v_max);
    next.v_h = v_h;
    next.v_r = v_r;
    if next.lane.conflicts() {
        next.pos_h = pos_h;
        next.pos_r = pos_r;
    } else {
        // The merge point travels with the robot.
        next.pos_h = pos_h + v_r * cfg.dt;
    }
    if let LaneStatus::Switching { remaining } = next.lane {
        next.lane = if remaining <= 1 {
            LaneStatus::Shared
        } else {
            LaneStatus::Switching {
                remaining: remaining - 1,
            }
        };
    }
    let collided = start.lane.conflicts()
        && swept_overlap(
            (start.pos_h, next.pos_h),
            (start.pos_r, next.pos_r),
            cfg.dt,
            cfg.geometry.vehicle_length,
        );
    Ok((next, collided))
}

/// Whether both cars, moving linearly over the step, are inside the zone
/// during a common stretch of time.
fn swept_overlap(h: (f64, f64), r: (f64, f64), dt: f64, length: f64) -> bool {
    let window = |(p0, p1): (f64, f64)| -> Option<(f64, f64)> {
        let drop = p0 - p1;
        if drop <= 1e-12 {
            return (p0 <= 0.0 && p0 > -length).then_some((0.0, dt));
        }
        let lo = (p0 / drop * dt).max(0.0);
        let hi = ((p0 + length) / drop * dt).min(dt);
        (lo < hi).then_some((lo, hi))
    };
    match (window(h), window(r)) {
        (Some((a0, a1)), Some((b0, b1))) => a0.max(b0) < a1.min(b1),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{ScenarioConfig, Variant};

    #[test]
    fn vehicle_step_arithmetic() {
        let (p, v) = step_vehicle(10.0, 5.0, 2.0, 0.33, 15.0);
        assert!((v - 5.66).abs() < 1e-12);
        assert!((p - (10.0 - 1.8678)).abs() < 1e-12);
        let (_, v) = step_vehicle(3.0, 0.0, -2.0, 0.33, 15.0);
        assert_eq!(v, 0.0);
        let (_, v) = step_vehicle(3.0, 14.9, 2.0, 0.33, 15.0);
        assert_eq!(v, 15.0);
    }

    #[test]
    fn tmtc_examples() {
        assert!((tmtc_positions(3.0, 3.0, 3.0, 3.0, 4.0) - 1.0).abs() < 1e-12);
        assert!(tmtc_positions(3.0, 3.0, 3.0, 0.0, 4.0).is_infinite());
        // Human exits before the robot arrives.
        assert!(tmtc_positions(1.0, 10.0, 20.0, 2.0, 4.0).is_infinite());
        // Both inside.
        assert_eq!(tmtc_positions(-1.0, 2.0, -2.0, 0.0, 4.0), 0.0);
        // Cleared human.
        assert!(tmtc_positions(-4.0, 2.0, 1.0, 2.0, 4.0).is_infinite());
    }

    #[test]
    fn lane_switch_geometry() {
        let cfg = ScenarioConfig::preset(ScenarioKind::LaneSwitch, Variant::Safe);
        let s = TrafficState::initial(&cfg, WorldState::new(10.0, 6.0, 5.0, 4.0).unwrap());
        assert!(tmtc(&s, 4.0).is_infinite());
        // Keeping in the own lane leaves the merge lead untouched.
        let (k, _) = step_traffic(&cfg, &s, RobotAction::Keep, 0.0).unwrap();
        assert_eq!(k.pos_r, 6.0);
        assert!((k.pos_h - (10.0 - 0.33)).abs() < 1e-12);
        let (sw, _) = step_traffic(&cfg, &s, RobotAction::SwitchLeft, 0.0).unwrap();
        assert_eq!(sw.lane, LaneStatus::Switching { remaining: 2 });
        assert!(tmtc(&sw, 4.0).is_finite());
        assert!(step_traffic(&cfg, &sw, RobotAction::SwitchLeft, 0.0).is_err());
        assert!(step_traffic(&cfg, &sw, RobotAction::SwitchRight, 0.0).is_err());
        let (a, _) = step_traffic(&cfg, &sw, RobotAction::Keep, 0.0).unwrap();
        let (b, _) = step_traffic(&cfg, &a, RobotAction::Keep, 0.0).unwrap();
        assert_eq!(b.lane, LaneStatus::Shared);
        let (back, _) = step_traffic(&cfg, &b, RobotAction::SwitchRight, 0.0).unwrap();
        assert_eq!(back.lane, LaneStatus::Clear);
        assert!(tmtc(&back, 4.0).is_infinite());
        assert!(step_traffic(&cfg, &s, RobotAction::SwitchRight, 0.0).is_err());
    }

    #[test]
    fn switch_actions_rejected_at_intersections() {
        let cfg = ScenarioConfig::preset(ScenarioKind::Intersection, Variant::Safe);
        let s = TrafficState::initial(&cfg, WorldState::new(10.0, 6.0, 5.0, 4.0).unwrap());
        assert!(matches!(
            step_traffic(&cfg, &s, RobotAction::SwitchLeft, 0.0),
            Err(Error::InvalidAction(_))
        ));
    }

    #[test]
    fn fast_pass_through_counts_as_collision() {
        let cfg = ScenarioConfig::preset(ScenarioKind::Intersection, Variant::Unsafe);
        // Both cars sweep through the zone within one step.
        let s = TrafficState::initial(&cfg, WorldState::new(1.0, 1.0, 12.0, 12.0).unwrap());
        let (_, hit) = step_traffic(&cfg, &s, RobotAction::Keep, 0.0).unwrap();
        assert!(hit);
        let apart = TrafficState::initial(&cfg, WorldState::new(1.0, 30.0, 12.0, 1.0).unwrap());
        let (_, hit) = step_traffic(&cfg, &apart, RobotAction::Keep, 0.0).unwrap();
        assert!(!hit);
    }
}
