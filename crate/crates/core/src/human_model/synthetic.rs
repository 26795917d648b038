use crate::domain::{BoundedHistory, HumanAction, Intention, WorldState, ACCEL_KEEP_BAND};
use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Reaction rules of one synthetic driver type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriverProfile {
    /// Yield when TMTC drops below this many seconds.
    pub yield_tmtc: f64,
    /// Acceleration used when yielding (m/s², negative).
    pub yield_decel: f64,
    /// Response to a robot probe, as a multiple of the probe's acceleration.
    pub probe_gain: f64,
    /// Standard deviation of the Gaussian action noise (m/s²).
    pub noise_std: f64,
    /// Number of recent steps in which a robot probe is remembered.
    pub memory: usize,
    /// Speed the driver returns to after slowing down (m/s).
    pub cruise_speed: f64,
    /// Acceleration used to regain the preferred speed (m/s²).
    pub resume_accel: f64,
}

/// Ground-truth driver used in place of human participants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticDriverParams {
    pub aggressive: DriverProfile,
    pub conservative: DriverProfile,
    /// Feasible acceleration range (m/s²).
    pub accel_min: f64,
    pub accel_max: f64,
    /// Relative spread of per-participant parameter jitter.
    pub participant_jitter: f64,
}

impl Default for SyntheticDriverParams {
    fn default() -> Self {
        SyntheticDriverParams {
            aggressive: DriverProfile {
                yield_tmtc: 0.6,
                yield_decel: -3.0,
                probe_gain: 0.5,
                noise_std: 0.1,
                memory: 2,
                cruise_speed: 4.5,
                resume_accel: 1.0,
            },
            conservative: DriverProfile {
                yield_tmtc: 1.5,
                yield_decel: -3.0,
                probe_gain: -1.5,
                noise_std: 0.1,
                memory: 2,
                cruise_speed: 4.5,
                resume_accel: 1.0,
            },
            accel_min: -4.0,
            accel_max: 3.0,
            participant_jitter: 0.1,
        }
    }
}

impl SyntheticDriverParams {
    pub fn profile(&self, i: Intention) -> &DriverProfile {
        match i {
            Intention::Aggressive => &self.aggressive,
            Intention::Conservative => &self.conservative,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.conservative.yield_tmtc <= self.aggressive.yield_tmtc {
            return Err(Error::Config(
                "conservative yield threshold must exceed the aggressive one".into(),
            ));
        }
        for p in [&self.aggressive, &self.conservative] {
            if p.memory == 0 {
                return Err(Error::Config("driver memory must be at least one step".into()));
            }
            if !(p.noise_std >= 0.0) || !(p.yield_tmtc > 0.0) || !(p.cruise_speed >= 0.0) {
                return Err(Error::Config("invalid synthetic driver profile".into()));
            }
        }
        if !(self.accel_min < 0.0 && self.accel_max > 0.0) {
            return Err(Error::Config("acceleration range must contain zero".into()));
        }
        if !(0.0..1.0).contains(&self.participant_jitter) {
            return Err(Error::Config("participant_jitter must lie in [0, 1)".into()));
        }
        Ok(())
    }

    /// History length the driver needs to see.
    pub fn memory(&self) -> usize {
        self.aggressive.memory.max(self.conservative.memory)
    }

    /// A participant: thresholds, gains and speeds scaled by independent
    /// factors in `1 ± participant_jitter`.
    pub fn participant<R: Rng + ?Sized>(&self, rng: &mut R) -> SyntheticDriverParams {
        let j = self.participant_jitter;
        let mut scale = |v: f64| {
            if j > 0.0 {
                v * rng.gen_range(1.0 - j..=1.0 + j)
            } else {
                v
            }
        };
        let mut jitter = |p: &DriverProfile| DriverProfile {
            yield_tmtc: scale(p.yield_tmtc),
            yield_decel: scale(p.yield_decel),
            probe_gain: scale(p.probe_gain),
            cruise_speed: scale(p.cruise_speed),
            ..*p
        };
        SyntheticDriverParams {
            aggressive: jitter(&self.aggressive),
            conservative: jitter(&self.conservative),
            ..*self
        }
    }
}

/// Noise-free acceleration of the synthetic driver.
///
/// `tmtc` is the current time-measured-to-collision and `h` the recent
/// (robot, human) accelerations in the conflict frame, oldest first.
pub fn synth_mean_accel(
    params: &SyntheticDriverParams,
    x: &WorldState,
    tmtc: f64,
    h: &BoundedHistory,
    i: Intention,
) -> f64 {
    let p = params.profile(i);
    let resume = || {
        if x.v_h < p.cruise_speed {
            p.resume_accel
        } else {
            0.0
        }
    };
    // Already at the colliding point: committed, just drive on.
    if x.d_h <= 0.0 {
        return resume();
    }
    if tmtc < p.yield_tmtc {
        return p.yield_decel;
    }
    let window = h.k().saturating_sub(p.memory);
    let probe = h
        .pairs()
        .skip(window)
        .map(|(r, _)| r)
        .filter(|&r| r > ACCEL_KEEP_BAND)
        .fold(0.0, f64::max);
    if probe > 0.0 {
        return p.probe_gain * probe;
    }
    resume()
}

/// One noisy action of the synthetic driver.
pub fn synth_human_step<R: Rng + ?Sized>(
    params: &SyntheticDriverParams,
    x: &WorldState,
    tmtc: f64,
    h: &BoundedHistory,
    i: Intention,
    rng: &mut R,
) -> Result<HumanAction> {
    let mean = synth_mean_accel(params, x, tmtc, h, i);
    let std = params.profile(i).noise_std;
    let noisy = if std > 0.0 {
        let n = Normal::new(0.0, std).map_err(|e| Error::Numeric(e.to_string()))?;
        mean + n.sample(rng)
    } else {
        mean
    };
    HumanAction::new(noisy.clamp(params.accel_min, params.accel_max))
}
