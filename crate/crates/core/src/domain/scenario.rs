use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    LaneSwitch,
    Intersection,
    LaneMerge,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 3] = [
        ScenarioKind::LaneSwitch,
        ScenarioKind::Intersection,
        ScenarioKind::LaneMerge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::LaneSwitch => "lane-switch",
            ScenarioKind::Intersection => "intersection",
            ScenarioKind::LaneMerge => "lane-merge",
        }
    }

    pub fn parse(s: &str) -> Option<ScenarioKind> {
        ScenarioKind::ALL.into_iter().find(|k| k.name() == s.trim())
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Safe,
    Unsafe,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Safe, Variant::Unsafe];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Safe => "safe",
            Variant::Unsafe => "unsafe",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        Variant::ALL.into_iter().find(|v| v.name() == s.trim())
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Closed sampling range `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo >= 0.0 && self.lo < self.hi) {
            return Err(Error::Config(format!(
                "range {name} = [{}, {}] must be finite, non-negative and non-degenerate",
                self.lo, self.hi
            )));
        }
        Ok(())
    }
}

/// Collision-zone geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    /// Vehicle length L (m); each vehicle occupies the zone while its
    /// distance to the colliding point lies in `(-L, 0]`.
    pub vehicle_length: f64,
    /// Lateral half-width of the zone (m). Informational in the 1-D model.
    pub zone_half_width: f64,
    /// Steps needed to complete a lane change.
    pub lane_change_steps: usize,
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry {
            vehicle_length: 4.0,
            zone_half_width: 1.75,
            lane_change_steps: 3,
        }
    }
}

/// Everything that defines one scenario cell of the evaluation suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub variant: Variant,
    /// Initial human distance to the colliding point (m).
    pub d_h: Interval,
    /// Initial robot distance to the colliding point (m). In lane-switch
    /// scenarios this is the merge point's lead ahead of the robot.
    pub d_r: Interval,
    pub v_h: Interval,
    pub v_r: Interval,
    #[serde(default)]
    pub geometry: Geometry,
    /// Step duration Δt (s).
    pub dt: f64,
    /// Speed cap (m/s).
    pub v_max: f64,
    /// Magnitude of the robot's Accelerate/Decelerate actions (m/s²).
    pub robot_accel: f64,
    /// Episode length limit (steps).
    pub timeout_steps: usize,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.d_h.validate("d_h")?;
        self.d_r.validate("d_r")?;
        self.v_h.validate("v_h")?;
        self.v_r.validate("v_r")?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.geometry.vehicle_length > 0.0 && self.geometry.vehicle_length.is_finite()) {
            return Err(Error::Config(format!(
                "vehicle_length = {} must be positive",
                self.geometry.vehicle_length
            )));
        }
        if !(self.v_max > 0.0) || !(self.robot_accel > 0.0) {
            return Err(Error::Config("v_max and robot_accel must be positive".into()));
        }
        if self.v_h.hi > self.v_max || self.v_r.hi > self.v_max {
            return Err(Error::Config("initial speeds exceed v_max".into()));
        }
        if self.timeout_steps == 0 {
            return Err(Error::Config("timeout_steps must be positive".into()));
        }
        if self.kind == ScenarioKind::LaneSwitch && self.geometry.lane_change_steps == 0 {
            return Err(Error::Config("lane_change_steps must be positive".into()));
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        format!("{}-{}", self.kind, self.variant)
    }

    /// One of the six shipped presets.
    pub fn preset(kind: ScenarioKind, variant: Variant) -> ScenarioConfig {
        use ScenarioKind::*;
        use Variant::*;
        let i = Interval::new;
        // (d_h, d_r, v_h, v_r)
        let (d_h, d_r, v_h, v_r) = match (kind, variant) {
            (Intersection, Safe) => (i(18.0, 26.0), i(16.0, 24.0), i(4.0, 6.0), i(1.0, 3.0)),
            (Intersection, Unsafe) => (i(9.0, 13.0), i(8.0, 12.0), i(5.0, 7.0), i(5.0, 7.0)),
            (LaneMerge, Safe) => (i(20.0, 28.0), i(18.0, 26.0), i(4.0, 6.0), i(1.0, 3.0)),
            (LaneMerge, Unsafe) => (i(10.0, 14.0), i(9.0, 13.0), i(5.0, 7.0), i(5.0, 7.0)),
            (LaneSwitch, Safe) => (i(16.0, 24.0), i(10.0, 14.0), i(5.0, 7.0), i(3.0, 5.0)),
            (LaneSwitch, Unsafe) => (i(6.0, 9.0), i(5.0, 7.0), i(6.0, 8.0), i(5.0, 7.0)),
        };
        ScenarioConfig {
            kind,
            variant,
            d_h,
            d_r,
            v_h,
            v_r,
            geometry: Geometry::default(),
            dt: 0.33,
            v_max: 15.0,
            robot_accel: 2.0,
            timeout_steps: 120,
        }
    }

    pub fn all_presets() -> Vec<ScenarioConfig> {
        ScenarioKind::ALL
            .into_iter()
            .flat_map(|k| Variant::ALL.into_iter().map(move |v| ScenarioConfig::preset(k, v)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        let all = ScenarioConfig::all_presets();
        assert_eq!(all.len(), 6);
        for c in &all {
            c.validate().unwrap();
        }
    }

    #[test]
    fn degenerate_range_rejected() {
        let mut c = ScenarioConfig::preset(ScenarioKind::Intersection, Variant::Safe);
        c.d_h = Interval::new(3.0, 3.0);
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = ScenarioConfig::preset(ScenarioKind::Intersection, Variant::Safe);
        c.dt = 0.0;
        assert!(c.validate().is_err());
    }
}
