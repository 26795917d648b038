use super::config::PlannerConfig;
use super::driving::{DrivingModel, DrivingState, SafeGuidance};
use super::model::Unguided;
use super::solver::{solve_bonus_mdp, Plan};
use crate::domain::{AccelBin, Belief, BoundedHistory, RobotAction, ScenarioConfig};
use crate::error::{Error, Result};
use crate::guided::SafeProbTable;
use crate::human_model::PolicyTable;
use crate::simulator::{LaneStatus, Observation, RobotPolicy, TrafficState};
use serde::{Deserialize, Serialize};
use std::fmt;

/// The compared robot policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PolicyKind {
    /// Planner with the bonus switched off.
    Myopic,
    /// Probe for `k` steps, then go only if the human slowed down.
    HeuristicK(usize),
    /// Bonus-augmented planner.
    Ipl,
    /// Bonus scaled by the expert safe probability.
    Iplg,
}

impl PolicyKind {
    pub const SUITE: [PolicyKind; 4] = [
        PolicyKind::Myopic,
        PolicyKind::HeuristicK(2),
        PolicyKind::Ipl,
        PolicyKind::Iplg,
    ];

    pub fn name(&self) -> String {
        match self {
            PolicyKind::Myopic => "myopic".into(),
            PolicyKind::HeuristicK(k) => format!("heuristic-{k}"),
            PolicyKind::Ipl => "ipl".into(),
            PolicyKind::Iplg => "iplg".into(),
        }
    }

    pub fn parse(s: &str) -> Option<PolicyKind> {
        match s.trim() {
            "myopic" => Some(PolicyKind::Myopic),
            "ipl" => Some(PolicyKind::Ipl),
            "iplg" => Some(PolicyKind::Iplg),
            other => other
                .strip_prefix("heuristic-")
                .and_then(|k| k.parse().ok())
                .map(PolicyKind::HeuristicK),
        }
    }
}

impl TryFrom<String> for PolicyKind {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        PolicyKind::parse(&s).ok_or_else(|| format!("unknown policy '{s}'"))
    }
}

impl From<PolicyKind> for String {
    fn from(k: PolicyKind) -> String {
        k.name()
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Read-only inputs shared by all planning policies.
#[derive(Debug, Clone, Copy)]
pub struct PlanningContext<'a> {
    pub scenario: &'a ScenarioConfig,
    pub table: &'a PolicyTable,
    pub safe: Option<&'a SafeProbTable>,
    pub planner: &'a PlannerConfig,
}

/// One planning call for `kind` (not the heuristic) from the given belief,
/// traffic state and history.
pub fn plan(
    kind: PolicyKind,
    ctx: &PlanningContext<'_>,
    b: Belief,
    traffic: &TrafficState,
    history: &BoundedHistory,
) -> Result<Plan> {
    let mut cfg = *ctx.planner;
    if kind == PolicyKind::Myopic {
        cfg.beta = 0.0;
    }
    let model = DrivingModel {
        scenario: ctx.scenario,
        table: ctx.table,
        planner: &cfg,
    };
    let s0 = DrivingState {
        traffic: *traffic,
        history: history.clone(),
    };
    match kind {
        PolicyKind::Myopic | PolicyKind::Ipl => solve_bonus_mdp(&model, b, &s0, &cfg, &Unguided),
        PolicyKind::Iplg => {
            let safe = ctx
                .safe
                .ok_or_else(|| Error::Config("iplg requires a safe-probability table".into()))?;
            solve_bonus_mdp(&model, b, &s0, &cfg, &SafeGuidance(safe))
        }
        PolicyKind::HeuristicK(_) => Err(Error::Config("heuristic policies do not plan".into())),
    }
}

/// Planner-backed policy for Myopic, IPL and IPLG.
#[derive(Debug, Clone)]
pub struct PlannerPolicy<'a> {
    pub kind: PolicyKind,
    pub ctx: PlanningContext<'a>,
    /// Plans cut short by the budget or the node cap.
    pub truncated: usize,
}

impl<'a> PlannerPolicy<'a> {
    pub fn new(kind: PolicyKind, ctx: PlanningContext<'a>) -> Result<Self> {
        match kind {
            PolicyKind::HeuristicK(_) => {
                return Err(Error::Config("heuristic policies do not plan".into()))
            }
            PolicyKind::Iplg if ctx.safe.is_none() => {
                return Err(Error::Config("iplg requires a safe-probability table".into()))
            }
            _ => {}
        }
        ctx.planner.validate()?;
        Ok(PlannerPolicy {
            kind,
            ctx,
            truncated: 0,
        })
    }
}

impl RobotPolicy for PlannerPolicy<'_> {
    fn name(&self) -> String {
        self.kind.name()
    }

    fn select(&mut self, obs: &Observation<'_>) -> Result<RobotAction> {
        let p = plan(self.kind, &self.ctx, obs.belief, obs.traffic, obs.history)?;
        self.truncated += usize::from(p.truncated);
        Ok(p.action)
    }
}

/// Scripted probe-then-commit baseline.
#[derive(Debug, Clone)]
pub struct HeuristicPolicy {
    pub k: usize,
    committed: bool,
}

impl HeuristicPolicy {
    pub fn new(k: usize) -> Self {
        HeuristicPolicy {
            k,
            committed: false,
        }
    }

    fn go(lane: LaneStatus) -> RobotAction {
        if lane == LaneStatus::Clear {
            RobotAction::SwitchLeft
        } else {
            RobotAction::Accelerate
        }
    }
}

impl RobotPolicy for HeuristicPolicy {
    fn name(&self) -> String {
        PolicyKind::HeuristicK(self.k).name()
    }

    fn select(&mut self, obs: &Observation<'_>) -> Result<RobotAction> {
        let s = obs.traffic;
        if obs.t < self.k {
            return Ok(Self::go(s.lane));
        }
        let crossed = s.human_cleared(obs.cfg.geometry.vehicle_length);
        if self.committed || crossed || obs.last_human_bin == Some(AccelBin::Decelerate) {
            self.committed = true;
            return Ok(Self::go(s.lane));
        }
        Ok(if s.v_r > 0.0 {
            RobotAction::Decelerate
        } else {
            RobotAction::Keep
        })
    }
}

/// Fresh policy instance for one episode.
pub fn make_policy<'a>(kind: PolicyKind, ctx: PlanningContext<'a>) -> Result<Box<dyn RobotPolicy + 'a>> {
    Ok(match kind {
        PolicyKind::HeuristicK(k) => Box::new(HeuristicPolicy::new(k)),
        _ => Box::new(PlannerPolicy::new(kind, ctx)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in PolicyKind::SUITE {
            assert_eq!(PolicyKind::parse(&k.name()), Some(k));
        }
        assert_eq!(PolicyKind::parse("bogus"), None);
    }
}
