//! Shared domain types and the discretization of continuous driving
//! quantities onto the policy-table bins.

mod discretize;
mod history;
mod log;
mod scenario;

pub use discretize::{
    discretize_accel, discretize_distance, discretize_speed, discretize_state, AccelBin,
    DiscreteIndex, DistanceBin, SpeedBin, StateBins, ACCEL_KEEP_BAND, STATE_CELLS,
};
pub use history::{pad_history, BoundedHistory, HistoryBins};
pub use log::{EpisodeLog, EpisodeOutcome, StepRecord};
pub use scenario::{Geometry, Interval, ScenarioConfig, ScenarioKind, Variant};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Continuous world state: distances of both vehicles to the potential
/// colliding point and their speeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    /// Human car distance to the colliding point (m).
    pub d_h: f64,
    /// Robot car distance to the colliding point (m).
    pub d_r: f64,
    /// Human car speed (m/s).
    pub v_h: f64,
    /// Robot car speed (m/s).
    pub v_r: f64,
}

impl WorldState {
    pub fn new(d_h: f64, d_r: f64, v_h: f64, v_r: f64) -> Result<Self> {
        let x = WorldState { d_h, d_r, v_h, v_r };
        x.validate()?;
        Ok(x)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("d_h", self.d_h),
            ("d_r", self.d_r),
            ("v_h", self.v_h),
            ("v_r", self.v_r),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidState(format!("{name} = {v}")));
            }
        }
        Ok(())
    }
}

/// Latent human intention, fixed for one episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Intention {
    Aggressive,
    Conservative,
}

impl Intention {
    pub const ALL: [Intention; 2] = [Intention::Aggressive, Intention::Conservative];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Intention::Aggressive => "aggressive",
            Intention::Conservative => "conservative",
        }
    }

    pub fn parse(s: &str) -> Option<Intention> {
        match s.trim().to_ascii_lowercase().as_str() {
            "aggressive" => Some(Intention::Aggressive),
            "conservative" => Some(Intention::Conservative),
            _ => None,
        }
    }
}

impl fmt::Display for Intention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Probability distribution over the two intentions, stored as
/// P(conservative).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    p_conservative: f64,
}

impl Belief {
    pub fn new(p_conservative: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_conservative) {
            return Err(Error::Numeric(format!(
                "belief probability {p_conservative} outside [0, 1]"
            )));
        }
        Ok(Belief { p_conservative })
    }

    pub fn uniform() -> Self {
        Belief {
            p_conservative: 0.5,
        }
    }

    pub fn certain(i: Intention) -> Self {
        Belief {
            p_conservative: match i {
                Intention::Aggressive => 0.0,
                Intention::Conservative => 1.0,
            },
        }
    }

    pub fn p_conservative(&self) -> f64 {
        self.p_conservative
    }

    pub fn prob(&self, i: Intention) -> f64 {
        match i {
            Intention::Aggressive => 1.0 - self.p_conservative,
            Intention::Conservative => self.p_conservative,
        }
    }

    pub fn as_array(&self) -> [f64; 2] {
        [1.0 - self.p_conservative, self.p_conservative]
    }

    /// L1 distance between the two full distributions.
    pub fn l1_distance(&self, other: &Belief) -> f64 {
        2.0 * (self.p_conservative - other.p_conservative).abs()
    }

    /// Bayes rule with per-intention likelihoods `[aggressive, conservative]`.
    pub fn posterior(&self, likelihood: [f64; 2]) -> Result<Belief> {
        let [pa, pc] = self.as_array();
        let wa = pa * likelihood[0];
        let wc = pc * likelihood[1];
        let z = wa + wc;
        if !(z > 0.0) || !z.is_finite() {
            return Err(Error::Numeric(format!(
                "belief update not normalizable (likelihoods {likelihood:?})"
            )));
        }
        Ok(Belief {
            p_conservative: (wc / z).clamp(0.0, 1.0),
        })
    }
}

impl Default for Belief {
    fn default() -> Self {
        Belief::uniform()
    }
}

/// Discrete robot action. Lane switches exist only in lane-switch scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RobotAction {
    Decelerate,
    Keep,
    Accelerate,
    SwitchLeft,
    SwitchRight,
}

impl RobotAction {
    /// Canonical order, also used for deterministic tie breaking.
    pub const ALL: [RobotAction; 5] = [
        RobotAction::Decelerate,
        RobotAction::Keep,
        RobotAction::Accelerate,
        RobotAction::SwitchLeft,
        RobotAction::SwitchRight,
    ];
    pub const LONGITUDINAL: [RobotAction; 3] = [
        RobotAction::Decelerate,
        RobotAction::Keep,
        RobotAction::Accelerate,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_switch(self) -> bool {
        matches!(self, RobotAction::SwitchLeft | RobotAction::SwitchRight)
    }

    /// Longitudinal acceleration for an action magnitude `accel` (m/s²).
    /// Lane switches hold the current speed.
    pub fn longitudinal_accel(self, accel: f64) -> f64 {
        match self {
            RobotAction::Decelerate => -accel,
            RobotAction::Accelerate => accel,
            RobotAction::Keep | RobotAction::SwitchLeft | RobotAction::SwitchRight => 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RobotAction::Decelerate => "decelerate",
            RobotAction::Keep => "keep",
            RobotAction::Accelerate => "accelerate",
            RobotAction::SwitchLeft => "switch-left",
            RobotAction::SwitchRight => "switch-right",
        }
    }

    pub fn parse(s: &str) -> Option<RobotAction> {
        RobotAction::ALL
            .into_iter()
            .find(|a| a.name() == s.trim().to_ascii_lowercase())
    }

    /// Action set available in a scenario.
    pub fn for_scenario(kind: ScenarioKind) -> &'static [RobotAction] {
        if kind == ScenarioKind::LaneSwitch {
            &RobotAction::ALL
        } else {
            &RobotAction::LONGITUDINAL
        }
    }

    /// Rejects lane switches outside lane-switch scenarios.
    pub fn check_allowed(self, kind: ScenarioKind) -> Result<()> {
        if self.is_switch() && kind != ScenarioKind::LaneSwitch {
            return Err(Error::InvalidAction(format!(
                "{} is only available in lane-switch scenarios",
                self.name()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for RobotAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Observed human action: the continuous acceleration and its bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HumanAction {
    pub accel: f64,
    pub bin: AccelBin,
}

impl HumanAction {
    pub fn new(accel: f64) -> Result<Self> {
        Ok(HumanAction {
            accel,
            bin: discretize_accel(accel)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn world_state_rejects_negative_and_nan() {
        assert!(WorldState::new(1.0, 2.0, 3.0, 4.0).is_ok());
        assert!(matches!(
            WorldState::new(-0.1, 2.0, 3.0, 4.0),
            Err(Error::InvalidState(_))
        ));
        assert!(WorldState::new(1.0, f64::NAN, 3.0, 4.0).is_err());
        assert!(WorldState::new(1.0, 2.0, f64::INFINITY, 4.0).is_err());
    }

    #[test]
    fn belief_posterior_arithmetic() {
        let b = Belief::uniform().posterior([0.2, 0.8]).unwrap();
        assert!((b.p_conservative() - 0.8).abs() < 1e-12);
        let certain = Belief::certain(Intention::Conservative)
            .posterior([0.9, 0.1])
            .unwrap();
        assert_eq!(certain.p_conservative(), 1.0);
        assert!(Belief::uniform().posterior([0.0, 0.0]).is_err());
        assert!(Belief::new(1.2).is_err());
    }

    #[test]
    fn lane_switch_actions_are_scenario_gated() {
        assert!(RobotAction::SwitchLeft
            .check_allowed(ScenarioKind::Intersection)
            .is_err());
        assert!(RobotAction::SwitchLeft
            .check_allowed(ScenarioKind::LaneSwitch)
            .is_ok());
        assert!(RobotAction::Keep
            .check_allowed(ScenarioKind::LaneMerge)
            .is_ok());
        assert_eq!(RobotAction::for_scenario(ScenarioKind::LaneMerge).len(), 3);
    }

    #[test]
    fn action_names_round_trip() {
        for a in RobotAction::ALL {
            assert_eq!(RobotAction::parse(a.name()), Some(a));
        }
        for i in Intention::ALL {
            assert_eq!(Intention::parse(i.name()), Some(i));
        }
    }
}
