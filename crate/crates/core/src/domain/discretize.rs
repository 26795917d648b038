use super::{HistoryBins, WorldState};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Half-width of the closed Keep band for accelerations (m/s²).
pub const ACCEL_KEEP_BAND: f64 = 0.2;

/// Number of cells spanned by the four state bins alone.
pub const STATE_CELLS: usize = 81;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AccelBin {
    Decelerate,
    Keep,
    Accelerate,
}

impl AccelBin {
    pub const ALL: [AccelBin; 3] = [AccelBin::Decelerate, AccelBin::Keep, AccelBin::Accelerate];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<AccelBin> {
        AccelBin::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            AccelBin::Decelerate => "decelerate",
            AccelBin::Keep => "keep",
            AccelBin::Accelerate => "accelerate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DistanceBin {
    Near,
    Middle,
    Far,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpeedBin {
    Low,
    Middle,
    High,
}

impl DistanceBin {
    pub const ALL: [DistanceBin; 3] = [DistanceBin::Near, DistanceBin::Middle, DistanceBin::Far];

    /// Representative distance used when a continuous point is needed:
    /// midpoints for bounded bins, 24 m for Far.
    pub fn representative(self) -> f64 {
        match self {
            DistanceBin::Near => 2.5,
            DistanceBin::Middle => 12.5,
            DistanceBin::Far => 24.0,
        }
    }
}

impl SpeedBin {
    pub const ALL: [SpeedBin; 3] = [SpeedBin::Low, SpeedBin::Middle, SpeedBin::High];

    /// Midpoints for bounded bins, 6.5 m/s for High.
    pub fn representative(self) -> f64 {
        match self {
            SpeedBin::Low => 0.5,
            SpeedBin::Middle => 3.0,
            SpeedBin::High => 6.5,
        }
    }
}

fn check_non_negative(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::InvalidState(format!("{name} = {v}")));
    }
    Ok(())
}

pub fn discretize_distance(d: f64) -> Result<DistanceBin> {
    check_non_negative("distance", d)?;
    Ok(if d < 5.0 {
        DistanceBin::Near
    } else if d < 20.0 {
        DistanceBin::Middle
    } else {
        DistanceBin::Far
    })
}

pub fn discretize_speed(v: f64) -> Result<SpeedBin> {
    check_non_negative("speed", v)?;
    Ok(if v < 1.0 {
        SpeedBin::Low
    } else if v < 5.0 {
        SpeedBin::Middle
    } else {
        SpeedBin::High
    })
}

pub fn discretize_accel(a: f64) -> Result<AccelBin> {
    if !a.is_finite() {
        return Err(Error::InvalidAction(format!("acceleration {a} is not finite")));
    }
    Ok(if a < -ACCEL_KEEP_BAND {
        AccelBin::Decelerate
    } else if a <= ACCEL_KEEP_BAND {
        AccelBin::Keep
    } else {
        AccelBin::Accelerate
    })
}

/// The four state bins of a world state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateBins {
    pub d_h: DistanceBin,
    pub d_r: DistanceBin,
    pub v_h: SpeedBin,
    pub v_r: SpeedBin,
}

impl StateBins {
    /// Ordinal in `0..81`, with `d_h` most significant.
    pub fn ordinal(&self) -> usize {
        ((self.d_h as usize * 3 + self.d_r as usize) * 3 + self.v_h as usize) * 3 + self.v_r as usize
    }

    pub fn from_ordinal(o: usize) -> Result<StateBins> {
        if o >= STATE_CELLS {
            return Err(Error::Lookup(format!("state ordinal {o} out of range")));
        }
        Ok(StateBins {
            d_h: DistanceBin::ALL[o / 27],
            d_r: DistanceBin::ALL[(o / 9) % 3],
            v_h: SpeedBin::ALL[(o / 3) % 3],
            v_r: SpeedBin::ALL[o % 3],
        })
    }

    pub fn representative(&self) -> WorldState {
        WorldState {
            d_h: self.d_h.representative(),
            d_r: self.d_r.representative(),
            v_h: self.v_h.representative(),
            v_r: self.v_r.representative(),
        }
    }

    pub fn all() -> impl Iterator<Item = StateBins> {
        (0..STATE_CELLS).map(|o| StateBins::from_ordinal(o).expect("in range"))
    }
}

pub fn discretize_state(x: &WorldState) -> Result<StateBins> {
    Ok(StateBins {
        d_h: discretize_distance(x.d_h)?,
        d_r: discretize_distance(x.d_r)?,
        v_h: discretize_speed(x.v_h)?,
        v_r: discretize_speed(x.v_r)?,
    })
}

/// Full policy-table key: state bins plus the binned history.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DiscreteIndex {
    pub state: StateBins,
    pub history: HistoryBins,
}

impl DiscreteIndex {
    /// Number of cells for history length `k`: 3^(4 + 2k).
    pub fn cell_count(k: usize) -> usize {
        STATE_CELLS * 9usize.pow(k as u32)
    }

    pub fn k(&self) -> usize {
        self.history.len()
    }

    /// Ordinal with the state bins most significant, then history pairs
    /// oldest first, robot before human within a pair.
    pub fn ordinal(&self) -> usize {
        let h = self
            .history
            .iter()
            .fold(0usize, |acc, [r, hu]| acc * 9 + r.index() * 3 + hu.index());
        self.state.ordinal() * 9usize.pow(self.k() as u32) + h
    }

    pub fn from_ordinal(o: usize, k: usize) -> Result<DiscreteIndex> {
        if o >= Self::cell_count(k) {
            return Err(Error::Lookup(format!("ordinal {o} out of range for k = {k}")));
        }
        let span = 9usize.pow(k as u32);
        let state = StateBins::from_ordinal(o / span)?;
        let mut rest = o % span;
        let mut history = vec![[AccelBin::Keep; 2]; k];
        for slot in history.iter_mut().rev() {
            let pair = rest % 9;
            rest /= 9;
            *slot = [AccelBin::ALL[pair / 3], AccelBin::ALL[pair % 3]];
        }
        Ok(DiscreteIndex { state, history })
    }
}
