use super::{discretize_accel, AccelBin};
use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Binned history: `[robot, human]` accel bins per step, oldest first.
pub type HistoryBins = Vec<[AccelBin; 2]>;

/// The last `k` (robot accel, human accel) pairs, oldest first, zero padded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundedHistory {
    k: usize,
    pairs: VecDeque<(f64, f64)>,
}

impl BoundedHistory {
    /// All-zero history of length `k`.
    pub fn new(k: usize) -> Self {
        BoundedHistory {
            k,
            pairs: std::iter::repeat((0.0, 0.0)).take(k).collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Appends the newest pair and drops the oldest.
    pub fn push(&mut self, robot_accel: f64, human_accel: f64) {
        if self.k == 0 {
            return;
        }
        self.pairs.pop_front();
        self.pairs.push_back((robot_accel, human_accel));
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.pairs.iter().copied()
    }

    /// Most recent pair, if `k > 0`.
    pub fn last(&self) -> Option<(f64, f64)> {
        self.pairs.back().copied()
    }

    /// Flattened `[aR_0, aH_0, aR_1, aH_1, ...]`.
    pub fn flat(&self) -> Vec<f64> {
        self.pairs.iter().flat_map(|&(r, h)| [r, h]).collect()
    }

    pub fn bins(&self) -> Result<HistoryBins> {
        self.pairs
            .iter()
            .map(|&(r, h)| Ok([discretize_accel(r)?, discretize_accel(h)?]))
            .collect()
    }
}

/// Keeps the last `k` pairs of `raw`, prepending `(0, 0)` while short.
pub fn pad_history(raw: &[(f64, f64)], k: usize) -> BoundedHistory {
    let mut h = BoundedHistory::new(k);
    let start = raw.len().saturating_sub(k);
    for &(r, a) in &raw[start..] {
        h.push(r, a);
    }
    h
}
