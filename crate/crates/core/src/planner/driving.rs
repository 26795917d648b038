use super::config::PlannerConfig;
use super::model::{Guidance, InteractionModel};
use crate::domain::{AccelBin, BoundedHistory, Intention, RobotAction, ScenarioConfig, ScenarioKind};
use crate::error::Result;
use crate::guided::SafeProbTable;
use crate::human_model::{PolicyTable, LIKELIHOOD_FLOOR};
use crate::simulator::{conflict_frame_accel, step_traffic, tmtc, LaneStatus, TrafficState};

/// Planning state: continuous traffic state plus the bounded history.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivingState {
    pub traffic: TrafficState,
    pub history: BoundedHistory,
}

/// Merge key: lane, gridded positions and speeds, and the history bins.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DrivingKey {
    lane: (u8, usize),
    grid: [i64; 4],
    history: Vec<u8>,
}

/// Mean-MDP view of a driving scenario under the learned policy table.
#[derive(Debug, Clone, Copy)]
pub struct DrivingModel<'a> {
    pub scenario: &'a ScenarioConfig,
    pub table: &'a PolicyTable,
    pub planner: &'a PlannerConfig,
}

impl DrivingModel<'_> {
    fn ordinal(&self, s: &DrivingState) -> Result<usize> {
        self.table.index(&s.traffic.world(), &s.history)
    }

    /// Time (s) to cover `dist` from speed `v` accelerating at the robot's
    /// action magnitude up to the speed cap.
    fn time_to_cover(&self, dist: f64, v: f64) -> f64 {
        let a = self.scenario.robot_accel;
        let vmax = self.scenario.v_max;
        if dist <= 0.0 {
            return 0.0;
        }
        let t1 = ((vmax - v) / a).max(0.0);
        let d1 = v * t1 + 0.5 * a * t1 * t1;
        if dist <= d1 {
            (-v + (v * v + 2.0 * a * dist).sqrt()) / a
        } else {
            t1 + (dist - d1) / vmax
        }
    }

    /// Optimistic time (s) until the robot clears the zone: drive through
    /// at full acceleration if the robot gets out well before the human
    /// arrives, otherwise after the human has left.
    pub fn time_to_goal(&self, s: &TrafficState) -> f64 {
        let length = self.scenario.geometry.vehicle_length;
        let dt = self.scenario.dt;
        let switch_delay = match s.lane {
            LaneStatus::Clear => self.scenario.geometry.lane_change_steps as f64 * dt,
            _ => 0.0,
        };
        let t_free = switch_delay + self.time_to_cover(s.pos_r + length, s.v_r);
        if s.human_cleared(length) {
            return t_free;
        }
        let (entry, exit) = if s.v_h > 1e-6 {
            (s.pos_h.max(0.0) / s.v_h, (s.pos_h + length) / s.v_h)
        } else if s.pos_h > 0.0 {
            (f64::INFINITY, f64::INFINITY)
        } else {
            (0.0, f64::INFINITY)
        };
        if t_free + 0.5 < entry {
            t_free
        } else if exit.is_finite() {
            t_free.max(exit) + dt
        } else {
            // Human parked inside the zone; the robot is stuck for the horizon.
            self.scenario.timeout_steps as f64 * dt
        }
    }
}

fn lane_code(l: LaneStatus) -> (u8, usize) {
    match l {
        LaneStatus::Clear => (0, 0),
        LaneStatus::Switching { remaining } => (1, remaining),
        LaneStatus::Shared => (2, 0),
    }
}

impl InteractionModel for DrivingModel<'_> {
    type State = DrivingState;
    type Key = DrivingKey;

    fn key(&self, s: &DrivingState) -> DrivingKey {
        let p = self.planner.merge_position;
        let v = self.planner.merge_speed;
        let t = &s.traffic;
        let bins = s.history.bins().unwrap_or_default();
        DrivingKey {
            lane: lane_code(t.lane),
            grid: [
                (t.pos_h / p).round() as i64,
                (t.pos_r / p).round() as i64,
                (t.v_h / v).round() as i64,
                (t.v_r / v).round() as i64,
            ],
            history: bins.iter().flat_map(|[r, h]| [*r as u8, *h as u8]).collect(),
        }
    }

    fn actions(&self, s: &DrivingState) -> Vec<RobotAction> {
        let mut a = RobotAction::LONGITUDINAL.to_vec();
        if self.scenario.kind == ScenarioKind::LaneSwitch {
            match s.traffic.lane {
                LaneStatus::Clear => a.push(RobotAction::SwitchLeft),
                LaneStatus::Shared => a.push(RobotAction::SwitchRight),
                LaneStatus::Switching { .. } => {}
            }
        }
        a
    }

    fn is_terminal(&self, s: &DrivingState) -> bool {
        s.traffic.goal_reached(self.scenario.geometry.vehicle_length)
    }

    fn human_distribution(&self, s: &DrivingState, i: Intention) -> Result<[f64; 3]> {
        self.table.distribution(self.ordinal(s)?, i)
    }

    fn likelihood(&self, s: &DrivingState, i: Intention, bin: AccelBin) -> Result<f64> {
        Ok(self.human_distribution(s, i)?[bin.index()].max(LIKELIHOOD_FLOOR))
    }

    fn step(&self, s: &DrivingState, a: RobotAction, bin: AccelBin) -> Result<(DrivingState, f64)> {
        let cfg = self.scenario;
        let r = &self.planner.rewards;
        let a_h = self.table.human_reps[bin.index()];
        let length = cfg.geometry.vehicle_length;
        let mut traffic = s.traffic;
        let mut history = s.history.clone();
        let mut total = 0.0;
        let mut disc = 1.0;
        for j in 0..self.planner.action_repeat {
            // Switches only take effect once; later sub-steps keep the lane.
            let act = if j > 0 && a.is_switch() { RobotAction::Keep } else { a };
            let (next, collided) = step_traffic(cfg, &traffic, act, a_h)?;
            history.push(conflict_frame_accel(&traffic, act, cfg.robot_accel), a_h);
            let mut reward = r.step;
            if act == RobotAction::Accelerate {
                reward += r.accel_cost;
            }
            if collided {
                reward += r.collision;
            }
            if tmtc(&next, length) < r.near_miss_tmtc {
                reward += r.near_miss;
            }
            let done = next.goal_reached(length);
            if done {
                reward += r.goal;
            }
            total += disc * reward;
            disc *= self.planner.gamma;
            traffic = next;
            if done {
                break;
            }
        }
        Ok((DrivingState { traffic, history }, total))
    }

    fn steps_per_transition(&self) -> usize {
        self.planner.action_repeat
    }

    fn leaf_value(&self, s: &DrivingState) -> f64 {
        let steps = (self.time_to_goal(&s.traffic) / self.scenario.dt).ceil();
        let g = self.planner.gamma;
        let disc = g.powf(steps);
        let r = &self.planner.rewards;
        disc * r.goal + r.step * (1.0 - disc) / (1.0 - g)
    }
}

/// Safe-probability table as planner guidance.
#[derive(Debug, Clone, Copy)]
pub struct SafeGuidance<'a>(pub &'a SafeProbTable);

impl Guidance<DrivingState> for SafeGuidance<'_> {
    fn weight(&self, s: &DrivingState, a: RobotAction) -> Result<f64> {
        self.0.safe_prob(&s.traffic.world(), a)
    }
}
