use super::demos::HumanDemo;
use super::gp::GpModel;
use crate::domain::{
    discretize_accel, discretize_state, AccelBin, BoundedHistory, DiscreteIndex, HumanAction,
    Intention, StateBins, WorldState, ACCEL_KEEP_BAND, STATE_CELLS,
};
use crate::error::{Error, Result};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};
use std::fmt::Write as _;

/// Smallest likelihood handed to belief updates.
pub const LIKELIHOOD_FLOOR: f64 = 1e-3;

/// Probability mass of `N(mean, std²)` on the Decelerate, Keep and
/// Accelerate intervals. The three entries sum to one.
pub fn bin_probabilities(mean: f64, std: f64) -> Result<[f64; 3]> {
    if !(std > 0.0) || !mean.is_finite() {
        return Err(Error::Numeric(format!("invalid predictive N({mean}, {std}²)")));
    }
    let n = Normal::new(0.0, 1.0).map_err(|e| Error::Numeric(e.to_string()))?;
    let dec = n.cdf((-ACCEL_KEEP_BAND - mean) / std);
    let acc = n.cdf((mean - ACCEL_KEEP_BAND) / std);
    let keep = (1.0 - dec - acc).max(0.0);
    let z = dec + keep + acc;
    Ok([dec / z, keep / z, acc / z])
}

/// Mean observed human acceleration per bin, used as the continuous value
/// of a binned human action. Empty bins fall back to `fallback`.
pub fn human_bin_representatives(demos: &[HumanDemo], fallback: [f64; 3]) -> [f64; 3] {
    let mut sum = [0.0; 3];
    let mut n = [0usize; 3];
    for r in demos.iter().flat_map(|d| &d.rows) {
        if let Ok(b) = discretize_accel(r.human_accel) {
            sum[b.index()] += r.human_accel;
            n[b.index()] += 1;
        }
    }
    std::array::from_fn(|i| if n[i] > 0 { sum[i] / n[i] as f64 } else { fallback[i] })
}

/// Query point for every state cell: the mean demonstrated state inside the
/// cell, or the bin representatives when no demonstration visits it.
pub fn cell_query_points(demos: &[HumanDemo]) -> Vec<WorldState> {
    let mut sum = vec![[0.0; 4]; STATE_CELLS];
    let mut n = vec![0usize; STATE_CELLS];
    for r in demos.iter().flat_map(|d| &d.rows) {
        if let Ok(cell) = discretize_state(&r.state) {
            let o = cell.ordinal();
            let x = &r.state;
            for (acc, v) in sum[o].iter_mut().zip([x.d_h, x.d_r, x.v_h, x.v_r]) {
                *acc += v;
            }
            n[o] += 1;
        }
    }
    StateBins::all()
        .map(|cell| {
            let o = cell.ordinal();
            if n[o] == 0 {
                return cell.representative();
            }
            let m = sum[o].map(|v| v / n[o] as f64);
            WorldState {
                d_h: m[0],
                d_r: m[1],
                v_h: m[2],
                v_r: m[3],
            }
        })
        .collect()
}

/// Discretized intention-conditioned human policy.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTable {
    k: usize,
    /// Continuous robot acceleration standing for each bin in histories.
    pub robot_reps: [f64; 3],
    /// Continuous human acceleration standing for each bin.
    pub human_reps: [f64; 3],
    /// Indexed by ordinal, then intention, then bin.
    probs: Vec<[[f64; 3]; 2]>,
}

impl PolicyTable {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Table with the same distribution in every cell.
    pub fn uniform_rows(k: usize, rows: [[f64; 3]; 2], robot_reps: [f64; 3], human_reps: [f64; 3]) -> Self {
        PolicyTable {
            k,
            robot_reps,
            human_reps,
            probs: vec![rows; DiscreteIndex::cell_count(k)],
        }
    }

    /// Evaluates both models at every cell's query point (one per state
    /// cell, see [`cell_query_points`]) with the history bins replaced by
    /// their representatives, and integrates the predictive Gaussian over
    /// the three bins.
    pub fn build(
        aggressive: &GpModel,
        conservative: &GpModel,
        robot_reps: [f64; 3],
        human_reps: [f64; 3],
        points: &[WorldState],
    ) -> Result<PolicyTable> {
        if points.len() != STATE_CELLS {
            return Err(Error::Shape {
                expected: STATE_CELLS,
                got: points.len(),
            });
        }
        if aggressive.intention != Intention::Aggressive
            || conservative.intention != Intention::Conservative
        {
            return Err(Error::Config("models passed in the wrong intention order".into()));
        }
        if aggressive.k != conservative.k {
            return Err(Error::Shape {
                expected: aggressive.k,
                got: conservative.k,
            });
        }
        let k = aggressive.k;
        let probs = (0..DiscreteIndex::cell_count(k))
            .into_par_iter()
            .map(|o| {
                let idx = DiscreteIndex::from_ordinal(o, k)?;
                let x = points[idx.state.ordinal()];
                let raw: Vec<(f64, f64)> = idx
                    .history
                    .iter()
                    .map(|[r, h]| (robot_reps[r.index()], human_reps[h.index()]))
                    .collect();
                let h = crate::domain::pad_history(&raw, k);
                let row = |m: &GpModel| -> Result<[f64; 3]> {
                    let (mean, std) = m.predict_state(&x, &h)?;
                    bin_probabilities(mean, std)
                };
                Ok([row(aggressive)?, row(conservative)?])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PolicyTable {
            k,
            robot_reps,
            human_reps,
            probs,
        })
    }

    pub fn index(&self, x: &WorldState, h: &BoundedHistory) -> Result<usize> {
        if h.k() != self.k {
            return Err(Error::Lookup(format!(
                "history length {} does not match table k = {}",
                h.k(),
                self.k
            )));
        }
        let idx = DiscreteIndex {
            state: discretize_state(x)?,
            history: h.bins()?,
        };
        Ok(idx.ordinal())
    }

    /// Stored distribution over the accel bins.
    pub fn distribution(&self, ordinal: usize, i: Intention) -> Result<[f64; 3]> {
        self.probs
            .get(ordinal)
            .map(|r| r[i.index()])
            .ok_or_else(|| Error::Lookup(format!("ordinal {ordinal} outside table")))
    }

    /// Floored likelihood of an observed bin.
    pub fn likelihood(&self, ordinal: usize, i: Intention, bin: AccelBin) -> Result<f64> {
        Ok(self.distribution(ordinal, i)?[bin.index()].max(LIKELIHOOD_FLOOR))
    }

    pub fn action_likelihood(
        &self,
        x: &WorldState,
        h: &BoundedHistory,
        i: Intention,
        a: &HumanAction,
    ) -> Result<f64> {
        self.likelihood(self.index(x, h)?, i, a.bin)
    }

    /// Flat text form keyed by ordinal.
    pub fn to_text(&self) -> String {
        let mut s = format!("policy-table k {}\n", self.k);
        let reps = |v: &[f64; 3]| format!("{} {} {}", v[0], v[1], v[2]);
        let _ = writeln!(s, "robot-reps {}", reps(&self.robot_reps));
        let _ = writeln!(s, "human-reps {}", reps(&self.human_reps));
        s.push_str("ordinal,agg_dec,agg_keep,agg_acc,con_dec,con_keep,con_acc\n");
        for (o, [a, c]) in self.probs.iter().enumerate() {
            let _ = writeln!(s, "{o},{},{},{},{},{},{}", a[0], a[1], a[2], c[0], c[1], c[2]);
        }
        s
    }

    pub fn parse(text: &str) -> Result<PolicyTable> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| Error::parse(1, format!("missing {what}")))
        };
        let (n, l) = next("header")?;
        let k: usize = l
            .strip_prefix("policy-table k ")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::parse(n, "expected 'policy-table k <k>'"))?;
        let reps = |(n, l): (usize, &str), key: &str| -> Result<[f64; 3]> {
            let v: Vec<f64> = l
                .strip_prefix(key)
                .ok_or_else(|| Error::parse(n, format!("expected '{key}'")))?
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::parse(n, format!("invalid number '{t}'"))))
                .collect::<Result<_>>()?;
            v.try_into()
                .map_err(|_| Error::parse(n, "expected three representatives"))
        };
        let robot_reps = reps(next("robot-reps")?, "robot-reps")?;
        let human_reps = reps(next("human-reps")?, "human-reps")?;
        next("column line")?;
        let count = DiscreteIndex::cell_count(k);
        let mut probs = Vec::with_capacity(count);
        for (n, l) in lines.filter(|(_, l)| !l.is_empty()) {
            let v: Vec<f64> = l
                .split(',')
                .map(|t| t.trim().parse().map_err(|_| Error::parse(n, format!("invalid field '{t}'"))))
                .collect::<Result<_>>()?;
            if v.len() != 7 || v[0] != probs.len() as f64 {
                return Err(Error::parse(n, "expected 'ordinal' plus six probabilities in order"));
            }
            for (i, p) in v[1..].iter().enumerate() {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::parse(n, format!("probability {p} in column {}", i + 1)));
                }
            }
            probs.push([[v[1], v[2], v[3]], [v[4], v[5], v[6]]]);
        }
        if probs.len() != count {
            return Err(Error::parse(0, format!("expected {count} rows, found {}", probs.len())));
        }
        Ok(PolicyTable {
            k,
            robot_reps,
            human_reps,
            probs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_mass_partition() {
        let p = bin_probabilities(-1.0, 0.1).unwrap();
        assert!(p[0] > 0.99);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let p = bin_probabilities(0.0, 1e-3).unwrap();
        assert!(p[1] > 0.999);
        assert!(bin_probabilities(0.0, 0.0).is_err());
    }

    #[test]
    fn floor_and_text_round_trip() {
        let t = PolicyTable::uniform_rows(
            1,
            [[1.0, 0.0, 0.0], [0.25, 0.5, 0.25]],
            [-2.0, 0.0, 2.0],
            [-2.9, 0.01, 1.1],
        );
        assert_eq!(t.len(), 81 * 9);
        assert_eq!(t.likelihood(0, Intention::Aggressive, AccelBin::Keep).unwrap(), LIKELIHOOD_FLOOR);
        assert_eq!(t.likelihood(0, Intention::Conservative, AccelBin::Keep).unwrap(), 0.5);
        assert!(t.distribution(81 * 9, Intention::Aggressive).is_err());
        let back = PolicyTable::parse(&t.to_text()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn history_length_must_match() {
        let t = PolicyTable::uniform_rows(2, [[0.2, 0.6, 0.2]; 2], [-2.0, 0.0, 2.0], [-2.0, 0.0, 2.0]);
        let x = WorldState::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(t.index(&x, &BoundedHistory::new(2)).is_ok());
        assert!(matches!(t.index(&x, &BoundedHistory::new(1)), Err(Error::Lookup(_))));
    }
}
