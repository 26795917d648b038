use super::{Intention, RobotAction, ScenarioKind, Variant, WorldState};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpisodeOutcome {
    GoalReached,
    Timeout,
}

/// One simulation step: the state the robot acted in, both actions, the
/// belief held while acting and the TMTC of that state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub state: WorldState,
    pub robot_action: RobotAction,
    /// Robot acceleration in the conflict frame, as histories record it.
    pub robot_accel: f64,
    pub human_accel: f64,
    pub p_conservative: f64,
    /// `None` encodes an infinite TMTC.
    #[serde(with = "inf_as_null")]
    pub tmtc: f64,
}

/// Complete closed-loop episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub intention: Intention,
    pub kind: ScenarioKind,
    pub variant: Variant,
    pub policy: String,
    pub seed: u64,
    pub outcome: EpisodeOutcome,
    /// Steps until the goal was reached, `None` on timeout.
    pub steps_to_goal: Option<usize>,
    /// Steps during which both cars shared the collision zone.
    pub collisions: usize,
    pub records: Vec<StepRecord>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    intention: Intention,
    kind: ScenarioKind,
    variant: Variant,
    policy: String,
    seed: u64,
    outcome: EpisodeOutcome,
    steps_to_goal: Option<usize>,
    collisions: usize,
    steps: usize,
}

impl EpisodeLog {
    pub fn min_tmtc(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.tmtc)
            .fold(f64::INFINITY, f64::min)
    }

    /// True if any step's TMTC falls below `threshold` seconds.
    pub fn near_miss(&self, threshold: f64) -> bool {
        self.records.iter().any(|r| r.tmtc < threshold)
    }

    /// Checks the per-step invariants: one record per step, strictly
    /// increasing timestamps starting at 0.
    pub fn validate(&self) -> Result<()> {
        for (i, r) in self.records.iter().enumerate() {
            if r.t != i {
                return Err(Error::InvalidState(format!(
                    "record {i} carries timestamp {}",
                    r.t
                )));
            }
        }
        Ok(())
    }

    /// Newline-delimited JSON: a header line followed by one line per step.
    pub fn write_ndjson<W: Write>(&self, mut w: W) -> Result<()> {
        let header = Header {
            intention: self.intention,
            kind: self.kind,
            variant: self.variant,
            policy: self.policy.clone(),
            seed: self.seed,
            outcome: self.outcome,
            steps_to_goal: self.steps_to_goal,
            collisions: self.collisions,
            steps: self.records.len(),
        };
        writeln!(w, "{}", to_json(&header)?)?;
        for r in &self.records {
            writeln!(w, "{}", to_json(r)?)?;
        }
        Ok(())
    }

    pub fn read_ndjson<R: BufRead>(r: R) -> Result<EpisodeLog> {
        let mut lines = r.lines().enumerate().filter_map(|(i, l)| match l {
            Ok(s) if s.trim().is_empty() => None,
            other => Some((i + 1, other)),
        });
        let (n, first) = lines.next().ok_or_else(|| Error::parse(1, "empty episode log"))?;
        let header: Header =
            serde_json::from_str(&first?).map_err(|e| Error::parse(n, e.to_string()))?;
        let mut records = Vec::with_capacity(header.steps);
        for (n, line) in lines {
            let rec: StepRecord =
                serde_json::from_str(&line?).map_err(|e| Error::parse(n, e.to_string()))?;
            records.push(rec);
        }
        if records.len() != header.steps {
            return Err(Error::parse(
                records.len() + 1,
                format!("header announces {} steps, found {}", header.steps, records.len()),
            ));
        }
        let log = EpisodeLog {
            intention: header.intention,
            kind: header.kind,
            variant: header.variant,
            policy: header.policy,
            seed: header.seed,
            outcome: header.outcome,
            steps_to_goal: header.steps_to_goal,
            collisions: header.collisions,
            records,
        };
        log.validate()?;
        Ok(log)
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string(v).map_err(|e| Error::Numeric(e.to_string()))
}

mod inf_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> EpisodeLog {
        let rec = |t, tmtc| StepRecord {
            t,
            state: WorldState::new(10.0, 9.5, 4.0, 3.0).unwrap(),
            robot_action: RobotAction::Keep,
            robot_accel: 0.0,
            human_accel: -1.25,
            p_conservative: 0.625,
            tmtc,
        };
        EpisodeLog {
            intention: Intention::Conservative,
            kind: ScenarioKind::Intersection,
            variant: Variant::Safe,
            policy: "ipl".into(),
            seed: 7,
            outcome: EpisodeOutcome::GoalReached,
            steps_to_goal: Some(2),
            collisions: 0,
            records: vec![rec(0, f64::INFINITY), rec(1, 0.75)],
        }
    }

    #[test]
    fn ndjson_round_trip_keeps_infinity() {
        let log = sample();
        let mut buf = Vec::new();
        log.write_ndjson(&mut buf).unwrap();
        let back = EpisodeLog::read_ndjson(buf.as_slice()).unwrap();
        assert_eq!(back, log);
        assert!(back.records[0].tmtc.is_infinite());
        assert!(back.near_miss(1.0));
        assert_eq!(back.min_tmtc(), 0.75);
    }

    #[test]
    fn truncated_log_is_a_parse_error() {
        let mut buf = Vec::new();
        sample().write_ndjson(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cut: Vec<&str> = text.lines().take(2).collect();
        let err = EpisodeLog::read_ndjson(cut.join("\n").as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }
}
