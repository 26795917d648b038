use super::demos::{GuideDemo, GuideRecord, HumanDemo, HumanRecord};
use super::synthetic::SyntheticDriverParams;
use crate::domain::{
    AccelBin, EpisodeLog, Intention, RobotAction, ScenarioConfig, ScenarioKind, Variant,
};
use crate::error::{Error, Result};
use crate::simulator::{
    run_episode, tmtc, tmtc_positions, EpisodeSetup, LaneStatus, Observation, RobotPolicy,
    SyntheticHuman, TrafficState,
};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Scripted cautious demonstrator.
///
/// Probes during the first steps only while the human is still far off,
/// proceeds once the human yields, the human has passed, or the robot can
/// clear the zone well ahead of the human, and otherwise waits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CautiousExpert {
    pub probe_steps: usize,
    /// Minimum human time-to-arrival (s) for a probe.
    pub probe_arrival: f64,
    /// Required gap (s) between the robot leaving and the human entering.
    pub clearance: f64,
    /// Speed the robot accelerates toward when proceeding (m/s).
    pub cruise_speed: f64,
}

impl Default for CautiousExpert {
    fn default() -> Self {
        CautiousExpert {
            probe_steps: 2,
            probe_arrival: 3.0,
            clearance: 1.5,
            cruise_speed: 8.0,
        }
    }
}

impl CautiousExpert {
    fn go(&self, s: &TrafficState) -> RobotAction {
        if s.v_r < self.cruise_speed {
            RobotAction::Accelerate
        } else {
            RobotAction::Keep
        }
    }

    fn wait(s: &TrafficState) -> RobotAction {
        if s.v_r > 0.0 {
            RobotAction::Decelerate
        } else {
            RobotAction::Keep
        }
    }

    fn human_arrival(s: &TrafficState) -> f64 {
        if s.pos_h <= 0.0 {
            0.0
        } else if s.v_h > 0.0 {
            s.pos_h / s.v_h
        } else {
            f64::INFINITY
        }
    }

    /// Robot clears the zone at current speed well before the human enters.
    fn clears_first(&self, s: &TrafficState, length: f64) -> bool {
        s.v_r > 0.0 && (s.pos_r + length) / s.v_r + self.clearance < Self::human_arrival(s)
    }
}

impl RobotPolicy for CautiousExpert {
    fn name(&self) -> String {
        "expert".into()
    }

    fn select(&mut self, obs: &Observation<'_>) -> Result<RobotAction> {
        let s = obs.traffic;
        let length = obs.cfg.geometry.vehicle_length;
        let yielding = obs.last_human_bin == Some(AccelBin::Decelerate);
        let passed = s.human_cleared(length);
        match s.lane {
            LaneStatus::Switching { .. } => return Ok(RobotAction::Keep),
            LaneStatus::Clear => {
                // Conflict the robot would face right after switching.
                let ttc = tmtc_positions(s.pos_h, s.v_h, s.pos_r, s.v_r, length);
                let far = Self::human_arrival(s) > self.probe_arrival;
                let safe = passed || ttc > 2.5 || (yielding && ttc > 1.5);
                return Ok(if safe && (far || passed || yielding || obs.t >= self.probe_steps) {
                    RobotAction::SwitchLeft
                } else {
                    Self::wait(s)
                });
            }
            LaneStatus::Shared => {}
        }
        if passed || s.pos_r <= 0.0 || self.clears_first(s, length) {
            return Ok(self.go(s));
        }
        let ttc = tmtc(s, length);
        if obs.t < self.probe_steps && Self::human_arrival(s) > self.probe_arrival && ttc > 2.5 {
            return Ok(RobotAction::Accelerate);
        }
        if yielding && obs.t >= 1 && ttc > 1.5 {
            return Ok(self.go(s));
        }
        Ok(Self::wait(s))
    }
}

/// Demonstration set sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoCounts {
    pub participants: usize,
    /// Episodes per intention and participant.
    pub per_intention: usize,
}

impl Default for DemoCounts {
    fn default() -> Self {
        DemoCounts {
            participants: 10,
            per_intention: 8,
        }
    }
}

/// `D^H` and `D^G` records of one logged episode.
pub fn demos_from_log(log: &EpisodeLog) -> (HumanDemo, GuideDemo) {
    let human = HumanDemo {
        intention: log.intention,
        kind: log.kind,
        rows: log
            .records
            .iter()
            .map(|r| HumanRecord {
                t: r.t,
                state: r.state,
                robot_accel: r.robot_accel,
                human_accel: r.human_accel,
            })
            .collect(),
    };
    let guide = GuideDemo {
        kind: log.kind,
        rows: log
            .records
            .iter()
            .map(|r| GuideRecord {
                t: r.t,
                state: r.state,
                action: r.robot_action,
            })
            .collect(),
    };
    (human, guide)
}

/// Runs the expert against synthetic participants. Each participant drives
/// `per_intention` episodes of each intention, alternating intentions and
/// alternating safe and unsafe starting conditions in pairs.
pub fn generate_demonstrations(
    kind: ScenarioKind,
    counts: DemoCounts,
    params: &SyntheticDriverParams,
    expert: CautiousExpert,
    seed: u64,
) -> Result<(Vec<HumanDemo>, Vec<GuideDemo>)> {
    if counts.participants == 0 || counts.per_intention == 0 {
        return Err(Error::Config("demonstration counts must be positive".into()));
    }
    params.validate()?;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut human = Vec::new();
    let mut guide = Vec::new();
    for _ in 0..counts.participants {
        let mut prng = ChaCha8Rng::seed_from_u64(master.next_u64());
        let driver = SyntheticHuman(params.participant(&mut prng));
        for j in 0..2 * counts.per_intention {
            let intention = Intention::ALL[j % 2];
            let variant = Variant::ALL[(j / 2) % 2];
            let cfg = ScenarioConfig::preset(kind, variant);
            let ep_seed = prng.next_u64();
            let mut rng = ChaCha8Rng::seed_from_u64(ep_seed);
            let start = TrafficState::sample(&cfg, &mut rng);
            let setup = EpisodeSetup {
                cfg: &cfg,
                k: driver.0.memory(),
                beliefs: None,
                seed: ep_seed,
            };
            let mut policy = expert;
            let log = run_episode(&setup, start, intention, &mut policy, &driver, &mut rng)?;
            let (h, g) = demos_from_log(&log);
            human.push(h);
            guide.push(g);
        }
    }
    Ok((human, guide))
}
